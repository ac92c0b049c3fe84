// Client-side validation: malformed input must never produce a network call.

import { describe, expect, it, vi } from 'vitest'

import { ApiClient } from '../src/api'
import { submitCohort } from '../src/flow'
import type { SessionView } from '../src/types'
import {
  parsePriorList,
  rowsToBits,
  validateDose,
  validateOutcomeRows,
  validateSessionConfig,
} from '../src/validate'

function openView(cohortSize = 3, recommended = 2): SessionView {
  return {
    schema_version: 1,
    session_id: 'a'.repeat(32),
    created_at: '2026-01-01T00:00:00+00:00',
    policy: 'seeda',
    status: 'open',
    cohorts: 6,
    patients: 18,
    config: {
      policy: 'seeda',
      theta: 0.35,
      cohort_size: cohortSize,
      prior_tox: [0.02, 0.06, 0.12, 0.2, 0.3, 0.4],
    },
    history: [],
    estimates: {
      n_per_dose: [3, 3, 3, 3, 3, 3],
      q_hat: [0, 0, 0, 0, 0, 0],
      p_hat: [0, 0, 0, 0, 0, 0],
      a_hat: 2.0,
      alpha: 0.3,
      model_toxicity: [0.02, 0.06, 0.12, 0.2, 0.3, 0.4],
      leader_counts: [0, 0, 0, 0, 0, 0],
    },
    next: {
      schema_version: 1,
      dose_index: recommended,
      admissible: [1, 2, 3, 4],
      index_values: null,
      leader: null,
      flags: [],
    },
  }
}

const row = (efficacy: boolean, toxicity: boolean) => ({ efficacy, toxicity })

describe('outcome row validation', () => {
  it('rejects a short cohort', () => {
    expect(validateOutcomeRows([row(true, false)], 3)).toHaveLength(1)
  })

  it('rejects an oversized cohort', () => {
    const rows = [row(1 as unknown as boolean, false), row(true, false),
      row(false, false), row(false, true)]
    expect(validateOutcomeRows(rows, 3).length).toBeGreaterThan(0)
  })

  it('rejects non-boolean entries', () => {
    const rows = [row(true, false), row(false, false),
      { efficacy: 'yes' as unknown as boolean, toxicity: false }]
    const errors = validateOutcomeRows(rows, 3)
    expect(errors.some((e) => e.includes('row 3'))).toBe(true)
  })

  it('accepts a complete boolean cohort and encodes bits', () => {
    const rows = [row(true, false), row(false, true), row(false, false)]
    expect(validateOutcomeRows(rows, 3)).toHaveLength(0)
    expect(rowsToBits(rows)).toEqual([[1, 0], [0, 1], [0, 0]])
  })
})

describe('dose validation', () => {
  it('accepts the recommended dose without override', () => {
    expect(validateDose(2, 6, 2, false)).toHaveLength(0)
  })

  it('requires the override toggle for a different dose', () => {
    const errors = validateDose(4, 6, 2, false)
    expect(errors.some((e) => e.includes('override'))).toBe(true)
    expect(validateDose(4, 6, 2, true)).toHaveLength(0)
  })

  it('rejects doses outside the grid even with override', () => {
    expect(validateDose(7, 6, 2, true).length).toBeGreaterThan(0)
    expect(validateDose(0, 6, 2, true).length).toBeGreaterThan(0)
  })
})

describe('submit flow network discipline', () => {
  it('malformed rows never reach the network', async () => {
    const fetchSpy = vi.fn()
    const api = new ApiClient('', fetchSpy as unknown as typeof fetch)
    const result = await submitCohort(api, openView(), [row(true, false)], 2, false)
    expect(result.ok).toBe(false)
    expect(result.errors.length).toBeGreaterThan(0)
    expect(fetchSpy).not.toHaveBeenCalled()
  })

  it('a dose mismatch without override never reaches the network', async () => {
    const fetchSpy = vi.fn()
    const api = new ApiClient('', fetchSpy as unknown as typeof fetch)
    const rows = [row(false, false), row(false, false), row(false, false)]
    const result = await submitCohort(api, openView(), rows, 5, false)
    expect(result.ok).toBe(false)
    expect(fetchSpy).not.toHaveBeenCalled()
  })

  it('valid input posts exactly once and returns the server view', async () => {
    const reply = openView()
    reply.cohorts = 7
    const fetchSpy = vi.fn(async () =>
      new Response(JSON.stringify(reply), { status: 200 }))
    const api = new ApiClient('', fetchSpy as unknown as typeof fetch)
    const rows = [row(true, false), row(false, false), row(false, true)]
    const result = await submitCohort(api, openView(), rows, 2, false)
    expect(result.ok).toBe(true)
    expect(result.view!.cohorts).toBe(7)
    expect(fetchSpy).toHaveBeenCalledTimes(1)
    const [url, init] = fetchSpy.mock.calls[0] as unknown as [string, RequestInit]
    expect(url).toBe(`/sessions/${'a'.repeat(32)}/outcomes`)
    expect(JSON.parse(String(init.body))).toEqual({
      dose: 2,
      outcomes: [[1, 0], [0, 0], [0, 1]],
      override: false,
    })
  })

  it('server rejections surface verbatim without mutating anything', async () => {
    const fetchSpy = vi.fn(async () =>
      new Response(JSON.stringify({ schema_version: 1, error: 'session is finalized' }),
        { status: 409 }))
    const api = new ApiClient('', fetchSpy as unknown as typeof fetch)
    const rows = [row(false, false), row(false, false), row(false, false)]
    const view = openView()
    const result = await submitCohort(api, view, rows, 2, false)
    expect(result.ok).toBe(false)
    expect(result.errors).toEqual(['session is finalized'])
    expect(result.view).toBeUndefined()
  })
})

describe('session config validation', () => {
  const good = () => ({
    policy: 'seeda' as const,
    theta: 0.35,
    cohort_size: 3,
    prior_tox: [0.02, 0.06, 0.12],
  })

  it('accepts a sound config', () => {
    expect(validateSessionConfig(good())).toHaveLength(0)
  })

  it('rejects thresholds outside (0, 1)', () => {
    expect(validateSessionConfig({ ...good(), theta: 1.2 }).length).toBeGreaterThan(0)
  })

  it('rejects non-increasing priors', () => {
    const bad = { ...good(), prior_tox: [0.2, 0.1, 0.3] }
    expect(validateSessionConfig(bad).length).toBeGreaterThan(0)
  })

  it('parses comma separated prior lists', () => {
    expect(parsePriorList('0.02, 0.06 0.12')).toEqual([0.02, 0.06, 0.12])
    expect(parsePriorList('0.02, zebra')).toBeNull()
  })
})
