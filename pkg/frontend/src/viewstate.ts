// Pure derivation of what the dashboard shows from the last server responses.
// Rendering reads only this; nothing here issues requests or computes scores.

import type {
  CampaignState,
  CampaignStatus,
  ProposalEntry,
} from "./types.js";

export interface RoundTableRow {
  variant: string;
  naturalness: number | null;
  consensus: number | null;
  ucb: number | null;
  measured: number | null;
  failed: boolean;
}

export interface DashboardView {
  status: CampaignStatus;
  roundIndex: number; // current (pending) or next round number
  proposeEnabled: boolean;
  gridEnabled: boolean;
  pendingBatch: string[]; // variants awaiting measurements
  currentRows: RoundTableRow[];
  historyRows: { round: number; rows: RoundTableRow[] }[];
}

function roundRows(state: CampaignState, index: number): RoundTableRow[] {
  const round = state.rounds[index];
  return round.proposed.map((variant) => {
    const score = round.scores[variant];
    return {
      variant,
      naturalness: score ? score.naturalness : null,
      consensus: score ? score.consensus : null,
      ucb: score ? score.ucb : null,
      measured: variant in round.measurements ? round.measurements[variant] : null,
      failed: round.failed.includes(variant),
    };
  });
}

export function deriveDashboard(state: CampaignState): DashboardView {
  const awaiting = state.status === "awaiting_measurements";
  const last = state.rounds.length - 1;
  const pendingBatch = awaiting ? state.rounds[last].proposed.slice() : [];
  const history: { round: number; rows: RoundTableRow[] }[] = [];
  const historyEnd = awaiting ? last : state.rounds.length;
  for (let i = 0; i < historyEnd; i++) {
    history.push({ round: state.rounds[i].index, rows: roundRows(state, i) });
  }
  return {
    status: state.status,
    roundIndex: awaiting ? state.rounds[last].index : state.rounds.length + 1,
    proposeEnabled: state.status === "ready_to_propose",
    gridEnabled: awaiting,
    pendingBatch,
    currentRows: awaiting ? roundRows(state, last) : [],
    historyRows: history,
  };
}

export function proposalToRows(batch: ProposalEntry[]): RoundTableRow[] {
  return batch.map((entry) => ({
    variant: entry.variant,
    naturalness: entry.naturalness ?? null,
    consensus: entry.consensus ?? null,
    ucb: entry.ucb ?? null,
    measured: null,
    failed: false,
  }));
}

export function formatScore(value: number | null): string {
  if (value === null || Number.isNaN(value)) return "–";
  return value.toFixed(3);
}
