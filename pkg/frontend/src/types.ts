/** Wire types for the screening service JSON API.
 *
 * These mirror the server responses field for field. The UI never
 * computes verdicts, priorities, or explanations itself; everything
 * here is either a server payload or display metadata for form labels.
 */

export type Verdict = "Halal" | "Haram";
export type Provenance = "machine" | "scholar";
export type PriorityName = "High" | "Low" | "Neutral";

export interface PatternMatch {
  pattern: string;
  count: number;
}

export interface FeatureVectorPayload {
  values: number[];
  evidence: Record<string, PatternMatch[]>;
}

export interface TriggeredFeature {
  feature: string;
  priority: PriorityName;
  description: string;
  evidence: PatternMatch[];
}

export interface ExplanationPayload {
  verdict_text: string;
  triggered: TriggeredFeature[];
  high_priority_majority: boolean;
}

/** POST /api/classify response. */
export interface ClassifyResponse {
  ticker: string;
  name: string;
  verdict: Verdict;
  verdict_text: string;
  provenance: Provenance;
  confidence: number | null;
  explanation: ExplanationPayload;
  high_priority_majority: boolean;
  low_evidence: boolean;
  revision: number | null;
  cached: boolean;
}

/** GET /api/rulings/{query} response. */
export interface RulingEntry {
  ticker: string;
  name: string;
  verdict: Verdict;
  verdict_text: string;
  provenance: Provenance;
  features: FeatureVectorPayload;
  explanation: ExplanationPayload;
  editor: string;
  created_at: string;
  updated_at: string;
  revision: number;
}

/** One row of GET /api/rulings. */
export interface RulingSummary {
  ticker: string;
  name: string;
  verdict: Verdict;
  verdict_text: string;
  provenance: Provenance;
  revision: number;
  updated_at: string;
}

export interface RulingsPage {
  entries: RulingSummary[];
  total: number;
  next_offset: number | null;
}

export interface LoginResponse {
  token: string;
  expires_at: string;
}

/** Body of PUT /api/rulings/{ticker}. */
export interface RulingDraftBody {
  verdict: Verdict;
  name?: string;
  verdict_text?: string;
  features?: number[];
}

/** The 18 features in server vector order, with their priority group.
 * Display metadata for the editor checkboxes only; the server remains
 * the authority on how features influence a verdict. */
export const FEATURE_CATALOG: ReadonlyArray<{
  name: string;
  priority: PriorityName;
}> = [
  { name: "PoW", priority: "Neutral" },
  { name: "Ethereum_Blockchain", priority: "Neutral" },
  { name: "PoS", priority: "Neutral" },
  { name: "DeFi", priority: "Low" },
  { name: "Speculation", priority: "High" },
  { name: "Staking", priority: "Low" },
  { name: "Swap_Platform", priority: "Low" },
  { name: "Liquidity", priority: "Low" },
  { name: "Lending", priority: "Low" },
  { name: "Borrowing", priority: "High" },
  { name: "Prediction_Market", priority: "High" },
  { name: "Leverage", priority: "High" },
  { name: "Margin", priority: "High" },
  { name: "Yield_Farming", priority: "High" },
  { name: "Governance", priority: "Low" },
  { name: "Financial_Project", priority: "Low" },
  { name: "Technical_Project", priority: "Neutral" },
  { name: "Service_Project", priority: "Low" },
];
