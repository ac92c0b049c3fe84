// Client-side mirrors of the server's validation rules so obviously broken
// input never reaches the network. The server remains the authority; these
// checks only pre-empt its 422 responses.

import type { OutcomeRow, SessionConfig } from './types'

export function validateOutcomeRows(
  rows: OutcomeRow[],
  cohortSize: number,
): string[] {
  const errors: string[] = []
  if (rows.length !== cohortSize) {
    errors.push(`expected ${cohortSize} outcome rows, got ${rows.length}`)
  }
  rows.forEach((row, i) => {
    if (typeof row.efficacy !== 'boolean' || typeof row.toxicity !== 'boolean') {
      errors.push(`row ${i + 1}: outcomes must be explicit yes/no entries`)
    }
  })
  return errors
}

/** Wire bits from validated form rows. */
export function rowsToBits(rows: OutcomeRow[]): [number, number][] {
  return rows.map((row) => [row.efficacy ? 1 : 0, row.toxicity ? 1 : 0])
}

export function validateDose(
  dose: number,
  kDoses: number,
  recommended: number,
  override: boolean,
): string[] {
  const errors: string[] = []
  if (!Number.isInteger(dose) || dose < 1 || dose > kDoses) {
    errors.push(`dose must be an integer between 1 and ${kDoses}`)
  } else if (dose !== recommended && !override) {
    errors.push(
      `dose ${dose} differs from the recommendation ${recommended}; ` +
        'confirm the override toggle to record it',
    )
  }
  return errors
}

export function validateSessionConfig(config: SessionConfig): string[] {
  const errors: string[] = []
  if (config.policy !== 'seeda' && config.policy !== 'seeda-plateau') {
    errors.push('policy must be seeda or seeda-plateau')
  }
  if (!(config.theta > 0 && config.theta < 1)) {
    errors.push('theta must lie strictly between 0 and 1')
  }
  if (!Number.isInteger(config.cohort_size) || config.cohort_size < 1) {
    errors.push('cohort size must be a positive integer')
  }
  const prior = config.prior_tox
  if (!Array.isArray(prior) || prior.length < 2) {
    errors.push('prior toxicities must list at least two values')
  } else {
    const inRange = prior.every((p) => p > 0 && p < 1)
    const increasing = prior.every((p, i) => i === 0 || p > prior[i - 1])
    if (!inRange) errors.push('prior toxicities must lie strictly inside (0, 1)')
    if (!increasing) errors.push('prior toxicities must be strictly increasing')
  }
  return errors
}

export function parsePriorList(text: string): number[] | null {
  const parts = text
    .split(/[,\s]+/)
    .filter((s) => s.length > 0)
    .map(Number)
  if (parts.length === 0 || parts.some((x) => Number.isNaN(x))) return null
  return parts
}
