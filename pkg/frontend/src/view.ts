// DOM rendering for the console. Every number shown here comes verbatim from
// the service (or is a display-only aggregation of its event log); the
// console computes no policy logic of its own.

import type { DecisionView, OutcomeRow, SessionView } from './types'

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  if (className) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

function fmt(x: number | null | undefined, digits = 3): string {
  return x === null || x === undefined ? '-' : x.toFixed(digits)
}

/** Display-only tallies from the server's event log. */
export function historyTotals(view: SessionView): {
  efficacySum: number
  toxicitySum: number
  patients: number
} {
  let efficacySum = 0
  let toxicitySum = 0
  let patients = 0
  for (const event of view.history) {
    for (const [x, y] of event.outcomes) {
      efficacySum += x
      toxicitySum += y
      patients += 1
    }
  }
  return { efficacySum, toxicitySum, patients }
}

export function renderDoseAxis(view: SessionView): HTMLElement {
  const wrap = el('div', 'dose-axis')
  const admissible = new Set(view.next?.admissible ?? [])
  const k = view.estimates.n_per_dose.length
  for (let dose = 1; dose <= k; dose++) {
    const cell = el('div', 'dose-cell', `d${dose}`)
    cell.dataset.dose = String(dose)
    if (admissible.has(dose)) cell.classList.add('admissible')
    if (view.next?.dose_index === dose) cell.classList.add('recommended')
    if (view.final?.dose_index === dose) cell.classList.add('final')
    wrap.appendChild(cell)
  }
  return wrap
}

export function renderEstimateBars(view: SessionView): HTMLElement {
  const wrap = el('div', 'estimate-bars')
  const { q_hat, p_hat, model_toxicity, n_per_dose } = view.estimates
  for (let i = 0; i < n_per_dose.length; i++) {
    const row = el('div', 'estimate-row')
    row.appendChild(el('span', 'estimate-dose', `d${i + 1}`))
    row.appendChild(el('span', 'estimate-n', `n=${n_per_dose[i]}`))
    const addBar = (cls: string, value: number | null, label: string) => {
      const bar = el('div', `bar ${cls}`)
      const fill = el('div', 'bar-fill')
      fill.style.width = value === null ? '0%' : `${Math.round(value * 100)}%`
      bar.title = `${label} ${fmt(value)}`
      bar.appendChild(fill)
      row.appendChild(bar)
    }
    addBar('bar-eff', q_hat[i], 'empirical efficacy')
    addBar('bar-tox', p_hat[i], 'empirical toxicity')
    addBar('bar-model', model_toxicity ? model_toxicity[i] : null, 'model toxicity')
    wrap.appendChild(row)
  }
  return wrap
}

export function renderSafetyGauge(view: SessionView): HTMLElement {
  const { toxicitySum, efficacySum, patients } = historyTotals(view)
  const theta = view.config.theta
  const mean = patients > 0 ? toxicitySum / patients : 0
  const gauge = el('div', 'safety-gauge')
  const meanLabel = el('span', 'running-toxicity',
    `running mean toxicity ${fmt(mean)} / threshold ${fmt(theta, 2)}`)
  if (mean > theta) meanLabel.classList.add('violated')
  gauge.appendChild(meanLabel)
  gauge.appendChild(el('span', 'efficacy-counter',
    `cumulative efficacy responses ${efficacySum} of ${patients}`))
  return gauge
}

export function renderHistoryTable(view: SessionView): HTMLElement {
  const table = el('table', 'history')
  const head = el('tr')
  for (const title of ['cohort', 'dose', 'outcomes (eff/tox)', 'override']) {
    head.appendChild(el('th', undefined, title))
  }
  table.appendChild(head)
  view.history.forEach((event, i) => {
    const row = el('tr', 'history-row')
    row.appendChild(el('td', undefined, String(i + 1)))
    row.appendChild(el('td', 'history-dose', String(event.dose)))
    row.appendChild(el('td', undefined,
      event.outcomes.map(([x, y]) => `${x}/${y}`).join('  ')))
    row.appendChild(el('td', undefined, event.override ? 'yes' : ''))
    table.appendChild(row)
  })
  return table
}

export function renderRecommendation(decision: DecisionView): HTMLElement {
  const card = el('div', 'recommendation-card')
  card.appendChild(el('div', 'recommended-dose', `next dose ${decision.dose_index}`))
  const admissible = decision.admissible ?? []
  card.appendChild(el('div', 'admissible-set',
    admissible.length > 0
      ? `admissible doses: ${admissible.join(', ')}`
      : 'admissible set pending initialization'))
  if (decision.leader !== null) {
    card.appendChild(el('div', 'leader', `efficacy leader: dose ${decision.leader}`))
  }
  if (decision.flags.length > 0) {
    card.appendChild(el('div', 'decision-flags', decision.flags.join(', ')))
  }
  return card
}

export function renderFinalCard(view: SessionView): HTMLElement {
  const card = el('div', 'final-card')
  card.appendChild(el('div', 'final-banner', 'finalized - read only'))
  if (view.final) {
    card.appendChild(el('div', 'final-dose',
      `recommended dose ${view.final.dose_index}`))
    if (view.final.flags.length > 0) {
      card.appendChild(el('div', 'final-flags', view.final.flags.join(', ')))
    }
  }
  return card
}

export interface OutcomeFormHandles {
  root: HTMLElement
  readRows(): OutcomeRow[]
  readDose(): number
  readOverride(): boolean
  setError(message: string): void
}

export function renderOutcomeForm(view: SessionView): OutcomeFormHandles {
  const root = el('form', 'outcome-form')
  root.addEventListener('submit', (e) => e.preventDefault())
  const cohort = view.config.cohort_size
  const recommended = view.next ? view.next.dose_index : 1
  const k = view.estimates.n_per_dose.length

  const doseRow = el('div', 'dose-row')
  const doseInput = el('input') as HTMLInputElement
  doseInput.type = 'number'
  doseInput.name = 'dose'
  doseInput.min = '1'
  doseInput.max = String(k)
  doseInput.value = String(recommended)
  doseInput.disabled = true
  const overrideToggle = el('input') as HTMLInputElement
  overrideToggle.type = 'checkbox'
  overrideToggle.name = 'override'
  overrideToggle.addEventListener('change', () => {
    doseInput.disabled = !overrideToggle.checked
    if (!overrideToggle.checked) doseInput.value = String(recommended)
  })
  doseRow.appendChild(el('label', undefined, 'dose given'))
  doseRow.appendChild(doseInput)
  doseRow.appendChild(el('label', 'override-label', 'record a non-recommended dose'))
  doseRow.appendChild(overrideToggle)
  root.appendChild(doseRow)

  const rows: { eff: HTMLInputElement; tox: HTMLInputElement }[] = []
  for (let i = 0; i < cohort; i++) {
    const row = el('div', 'outcome-row')
    row.appendChild(el('span', undefined, `patient ${i + 1}`))
    const eff = el('input') as HTMLInputElement
    eff.type = 'checkbox'
    eff.name = `eff-${i}`
    const tox = el('input') as HTMLInputElement
    tox.type = 'checkbox'
    tox.name = `tox-${i}`
    row.appendChild(el('label', undefined, 'effective'))
    row.appendChild(eff)
    row.appendChild(el('label', undefined, 'toxic'))
    row.appendChild(tox)
    rows.push({ eff, tox })
    root.appendChild(row)
  }

  const submit = el('button', 'submit-outcomes', 'record cohort')
  submit.type = 'submit'
  root.appendChild(submit)
  const errorBox = el('div', 'form-error')
  root.appendChild(errorBox)

  return {
    root,
    readRows: () =>
      rows.map((r) => ({ efficacy: r.eff.checked, toxicity: r.tox.checked })),
    readDose: () => Number(doseInput.value),
    readOverride: () => overrideToggle.checked,
    setError: (message: string) => {
      errorBox.textContent = message
    },
  }
}

export function renderDashboard(view: SessionView): HTMLElement {
  const root = el('div', 'session-dashboard')
  root.dataset.sessionId = view.session_id
  const header = el('div', 'session-header',
    `${view.policy} session - ${view.status} - cohort ${view.cohorts}, ` +
    `${view.patients} patients`)
  root.appendChild(header)
  root.appendChild(renderDoseAxis(view))
  root.appendChild(renderSafetyGauge(view))
  root.appendChild(renderEstimateBars(view))
  if (view.status === 'finalized') {
    root.appendChild(renderFinalCard(view))
  } else if (view.next) {
    root.appendChild(renderRecommendation(view.next))
  }
  root.appendChild(renderHistoryTable(view))
  return root
}

export function renderNotFound(sessionId: string): HTMLElement {
  return el('div', 'not-found', `no session ${sessionId}`)
}
