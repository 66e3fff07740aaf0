/** three.js voxel renderer: one instanced cube per occupied voxel, with a
 * small built-in orbit/zoom control. */

import * as THREE from "three";

import { occupiedCenters, type VoxelVolume } from "./rle.js";

export interface VolumeRenderer {
  render(volume: VoxelVolume): void;
}

export class ThreeVolumeRenderer implements VolumeRenderer {
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private renderer: THREE.WebGLRenderer;
  private mesh: THREE.InstancedMesh | null = null;
  private dim = 32;
  private theta = Math.PI / 4;
  private phi = Math.PI / 3;
  private radius = 2.2;

  constructor(private canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.01, 100);
    this.scene.background = new THREE.Color(0x10141c);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.55));
    const key = new THREE.DirectionalLight(0xffffff, 1.1);
    key.position.set(2, 3, 1.5);
    this.scene.add(key);
    this.attachControls();
    this.resize();
    window.addEventListener("resize", () => this.resize());
  }

  render(volume: VoxelVolume): void {
    this.dim = volume.dim;
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.mesh.geometry.dispose();
      (this.mesh.material as THREE.Material).dispose();
      this.mesh = null;
    }
    const centers = occupiedCenters(volume);
    const count = centers.length / 3;
    if (count > 0) {
      const size = 1 / volume.dim;
      const geometry = new THREE.BoxGeometry(size * 0.95, size * 0.95, size * 0.95);
      const material = new THREE.MeshLambertMaterial({ color: 0x7fb4ff });
      const mesh = new THREE.InstancedMesh(geometry, material, count);
      const m = new THREE.Matrix4();
      for (let i = 0; i < count; i++) {
        m.makeTranslation(
          centers[3 * i] / volume.dim - 0.5,
          centers[3 * i + 1] / volume.dim - 0.5,
          centers[3 * i + 2] / volume.dim - 0.5,
        );
        mesh.setMatrixAt(i, m);
      }
      mesh.instanceMatrix.needsUpdate = true;
      this.mesh = mesh;
      this.scene.add(mesh);
    }
    this.draw();
  }

  private attachControls(): void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    this.canvas.addEventListener("pointerdown", (e) => {
      dragging = true;
      lastX = e.clientX;
      lastY = e.clientY;
      this.canvas.setPointerCapture(e.pointerId);
    });
    this.canvas.addEventListener("pointerup", () => (dragging = false));
    this.canvas.addEventListener("pointermove", (e) => {
      if (!dragging) return;
      this.theta -= (e.clientX - lastX) * 0.008;
      this.phi = Math.min(Math.PI - 0.05, Math.max(0.05, this.phi - (e.clientY - lastY) * 0.008));
      lastX = e.clientX;
      lastY = e.clientY;
      this.draw();
    });
    this.canvas.addEventListener(
      "wheel",
      (e) => {
        e.preventDefault();
        this.radius = Math.min(8, Math.max(0.6, this.radius * (1 + e.deltaY * 0.001)));
        this.draw();
      },
      { passive: false },
    );
  }

  private resize(): void {
    const w = this.canvas.clientWidth || 640;
    const h = this.canvas.clientHeight || 480;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
    this.draw();
  }

  private draw(): void {
    this.camera.position.set(
      this.radius * Math.sin(this.phi) * Math.cos(this.theta),
      this.radius * Math.cos(this.phi),
      this.radius * Math.sin(this.phi) * Math.sin(this.theta),
    );
    this.camera.lookAt(0, 0, 0);
    this.renderer.render(this.scene, this.camera);
  }
}
