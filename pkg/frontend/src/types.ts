// Shapes of the campaign service's JSON responses. The UI never computes
// scores itself; every number rendered comes from one of these payloads.

export interface CampaignSummary {
  campaign_id: string;
  status: CampaignStatus;
  reference_length: number;
  rounds_completed: number;
  rounds_proposed: number;
  batch_size: number;
  max_rounds: number;
}

export type CampaignStatus =
  | "ready_to_propose"
  | "awaiting_measurements"
  | "complete";

export interface ScoreEntry {
  naturalness: number;
  consensus: number | null;
  ucb: number | null;
}

export interface CampaignRound {
  index: number;
  proposed: string[];
  scores: Record<string, ScoreEntry>;
  measurements: Record<string, number>;
  failed: string[];
}

export interface CampaignState {
  campaign_id: string;
  reference: string;
  embeddings_path: string;
  logprobs_path: string;
  dataset_path: string | null;
  status: CampaignStatus;
  rounds: CampaignRound[];
  config: {
    batch_size: number;
    rounds: number;
    alpha_schedule: number[];
    per_locus_cap: number | null;
    seed: number;
  };
}

export interface ProposalEntry extends Partial<ScoreEntry> {
  variant: string;
}

export interface ProposalResponse {
  campaign_id: string;
  round: number;
  status: CampaignStatus;
  batch: ProposalEntry[];
}

export interface RoundMetrics {
  round: number;
  proposed: number;
  measured: number;
  failed: number;
  unique_loci: number;
  new_loci: number;
  best_activity: number | null;
  mean_activity: number | null;
  best_activity_so_far: number | null;
  cum_top_decile_hits: number | null;
  top_percentile_success_so_far: boolean | null;
}

export interface MetricsResponse {
  campaign_id: string;
  status: CampaignStatus;
  rounds: RoundMetrics[];
}

export interface MeasurementEntry {
  variant: string;
  activity: number | null;
  failed: boolean;
}
