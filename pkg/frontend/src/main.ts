/** Wire the studio UI to the design server. */

import { ApiClient } from "./api.js";
import { drawHeatmap } from "./heatmap.js";
import { ThreeVolumeRenderer } from "./renderer.js";
import { StudioController } from "./state.js";

declare global {
  interface Window {
    FORMFUNC_SERVER?: string;
  }
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const serverUrl = window.FORMFUNC_SERVER ?? "http://127.0.0.1:8008";
  const api = new ApiClient(serverUrl);
  const renderer = new ThreeVolumeRenderer(el<HTMLCanvasElement>("viewport"));
  const heat = el<HTMLCanvasElement>("heatmap");
  const banner = el<HTMLDivElement>("banner");
  const ratioGauge = el<HTMLSpanElement>("ratio");
  const supportCount = el<HTMLSpanElement>("supported");
  const nearestList = el<HTMLUListElement>("nearest");
  const baseSelect = el<HTMLSelectElement>("base");
  const topSelect = el<HTMLSelectElement>("top");
  const baseSlider = el<HTMLInputElement>("base-percent");
  const topSlider = el<HTMLInputElement>("top-percent");

  const controller = new StudioController(
    (body) => api.combine(body),
    {
      onState: (state) => {
        banner.textContent = state.error ?? "";
        banner.style.display = state.error ? "block" : "none";
        document.body.classList.toggle("busy", state.requestInFlight);
        if (state.affordances) {
          ratioGauge.textContent = state.affordances.containability.ratio.toFixed(3);
          supportCount.textContent = String(
            state.affordances.supportability.supported_positions,
          );
          drawHeatmap(heat, state.affordances.supportability);
        }
        nearestList.innerHTML = state.nearest
          .map((n) => `<li>${n.class_label} #${n.index} (d=${n.distance.toFixed(2)})</li>`)
          .join("");
      },
      onVolume: (volume) => renderer.render(volume),
    },
  );

  el<HTMLButtonElement>("retry").addEventListener("click", () => controller.retry());

  const classes = await api.classes();
  for (const select of [baseSelect, topSelect]) {
    select.innerHTML = classes.classes
      .map((c) => `<option value="${c.label}">${c.label} (${c.affordances.join(", ")})</option>`)
      .join("");
  }
  baseSelect.value = "tub";
  topSelect.value = "table";
  const pushClasses = () => controller.setClasses(baseSelect.value, topSelect.value);
  baseSelect.addEventListener("change", pushClasses);
  topSelect.addEventListener("change", pushClasses);

  const pushSliders = () =>
    controller.onSliderChange(Number(baseSlider.value) / 100, Number(topSlider.value) / 100);
  baseSlider.addEventListener("input", pushSliders);
  topSlider.addEventListener("input", pushSliders);

  pushClasses(); // initial combine
}

boot().catch((error) => {
  const banner = document.getElementById("banner");
  if (banner) {
    banner.textContent = `failed to reach server: ${error}`;
    (banner as HTMLElement).style.display = "block";
  }
});
