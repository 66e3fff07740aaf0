/** Thin fetch client for the design server. */

import type {
  ClassesResponse,
  CombineRequestBody,
  CombineResponse,
  EssenceResponse,
} from "./types.js";

export type Transport = (path: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private transport: Transport = (path, init) => fetch(path, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.transport(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  classes(): Promise<ClassesResponse> {
    return this.request<ClassesResponse>("/classes");
  }

  essence(label: string): Promise<EssenceResponse> {
    return this.request<EssenceResponse>(`/essence/${encodeURIComponent(label)}`);
  }

  combine(body: CombineRequestBody): Promise<CombineResponse> {
    return this.request<CombineResponse>("/combine", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
