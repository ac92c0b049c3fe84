// The cohort-entry submit flow, isolated from DOM wiring so the "no network
// call on invalid input" contract is directly testable.

import { ApiClient, ApiError } from './api'
import type { OutcomeRow, SessionView } from './types'
import { rowsToBits, validateDose, validateOutcomeRows } from './validate'

export interface SubmitResult {
  ok: boolean
  errors: string[]
  view?: SessionView
}

export async function submitCohort(
  api: ApiClient,
  view: SessionView,
  rows: OutcomeRow[],
  dose: number,
  override: boolean,
): Promise<SubmitResult> {
  const recommended = view.next ? view.next.dose_index : NaN
  const problems = [
    ...validateOutcomeRows(rows, view.config.cohort_size),
    ...validateDose(dose, view.estimates.n_per_dose.length, recommended, override),
  ]
  if (problems.length > 0) {
    return { ok: false, errors: problems } // rejected before any network call
  }
  try {
    const next = await api.postOutcomes(view.session_id, dose, rowsToBits(rows), override)
    return { ok: true, errors: [], view: next }
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err)
    return { ok: false, errors: [message] } // server rejection, verbatim
  }
}
