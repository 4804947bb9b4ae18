// Thin typed client over the campaign service endpoints.

import type {
  CampaignState,
  CampaignSummary,
  MeasurementEntry,
  MetricsResponse,
  ProposalResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(detail);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class CampaignApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
        else if (body) detail = JSON.stringify(body);
      } catch {
        // keep the status line
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listCampaigns(): Promise<CampaignSummary[]> {
    return this.request("/campaigns");
  }

  createCampaign(body: {
    campaign_id: string;
    reference: string;
    embeddings_path: string;
    logprobs_path: string;
    dataset_path?: string | null;
    config?: Record<string, unknown>;
  }): Promise<CampaignSummary> {
    return this.request("/campaigns", {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getCampaign(id: string): Promise<CampaignState> {
    return this.request(`/campaigns/${encodeURIComponent(id)}`);
  }

  propose(id: string, alpha: number | null): Promise<ProposalResponse> {
    return this.request(`/campaigns/${encodeURIComponent(id)}/propose`, {
      method: "POST",
      body: JSON.stringify(alpha === null ? {} : { alpha }),
    });
  }

  submitMeasurements(
    id: string,
    measurements: MeasurementEntry[],
  ): Promise<CampaignSummary> {
    return this.request(`/campaigns/${encodeURIComponent(id)}/measurements`, {
      method: "POST",
      body: JSON.stringify({ measurements }),
    });
  }

  metrics(id: string): Promise<MetricsResponse> {
    return this.request(`/campaigns/${encodeURIComponent(id)}/metrics`);
  }
}
