// Wire types for the session service (schema_version 1). Field names follow
// the server schema exactly; see the service module of the backend package.

export interface DecisionView {
  schema_version: number
  dose_index: number
  admissible: number[] | null
  index_values: number[] | null
  leader: number | null
  flags: string[]
}

export interface EstimatesView {
  n_per_dose: number[]
  q_hat: number[]
  p_hat: number[]
  a_hat: number | null
  alpha: number | null
  model_toxicity: number[] | null
  leader_counts: number[]
}

export interface OutcomeEvent {
  event: 'outcomes'
  dose: number
  outcomes: [number, number][]
  override: boolean
}

export interface SessionConfig {
  policy: 'seeda' | 'seeda-plateau'
  theta: number
  cohort_size: number
  prior_tox: number[]
  [extra: string]: unknown
}

export interface SessionSummary {
  schema_version: number
  session_id: string
  created_at: string
  policy: string
  status: 'open' | 'finalized'
  cohorts: number
  patients: number
}

export interface SessionView extends SessionSummary {
  config: SessionConfig
  history: OutcomeEvent[]
  estimates: EstimatesView
  next?: DecisionView
  final?: { dose_index: number; flags: string[] }
}

export interface FinalizeResult {
  schema_version: number
  session_id: string
  dose_index: number
  flags: string[]
  estimates: EstimatesView
}

export interface SessionListResponse {
  schema_version: number
  sessions: SessionSummary[]
}

/** One cohort row as entered in the form before it becomes wire bits. */
export interface OutcomeRow {
  efficacy: boolean
  toxicity: boolean
}
