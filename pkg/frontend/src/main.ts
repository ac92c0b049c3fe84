// App wiring: a hash router over the session list and single-session pages.
// Optimistic UI is deliberately absent: every action re-renders from the
// server's response.

import { ApiClient, ApiError } from './api'
import { submitCohort } from './flow'
import type { SessionConfig, SessionView } from './types'
import { parsePriorList, validateSessionConfig } from './validate'
import { renderDashboard, renderNotFound, renderOutcomeForm } from './view'

const api = new ApiClient('')

function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild)
}

async function showSession(root: HTMLElement, sessionId: string): Promise<void> {
  let view: SessionView
  try {
    view = await api.getSession(sessionId)
  } catch (err) {
    clear(root)
    root.appendChild(renderNotFound(sessionId))
    return
  }
  clear(root)
  root.appendChild(renderDashboard(view))
  if (view.status !== 'open' || !view.next) return

  const form = renderOutcomeForm(view)
  form.root.addEventListener('submit', async () => {
    const result = await submitCohort(api, view, form.readRows(),
      form.readDose(), form.readOverride())
    if (!result.ok) {
      form.setError(result.errors.join('; '))
      return // nothing re-rendered; the view stays exactly as served
    }
    await showSession(root, sessionId)
  })
  root.appendChild(form.root)

  const finalize = document.createElement('button')
  finalize.className = 'finalize'
  finalize.textContent = 'finalize trial'
  finalize.addEventListener('click', async () => {
    try {
      await api.finalize(sessionId)
    } catch (err) {
      form.setError(err instanceof ApiError ? err.message : String(err))
      return
    }
    await showSession(root, sessionId)
  })
  root.appendChild(finalize)
}

async function showIndex(root: HTMLElement): Promise<void> {
  const listing = await api.listSessions()
  clear(root)
  const heading = document.createElement('h2')
  heading.textContent = 'live sessions'
  root.appendChild(heading)
  const list = document.createElement('ul')
  list.className = 'session-list'
  for (const summary of listing.sessions) {
    const item = document.createElement('li')
    const link = document.createElement('a')
    link.href = `#/sessions/${summary.session_id}`
    link.textContent =
      `${summary.session_id.slice(0, 8)} - ${summary.policy} - ` +
      `${summary.status} - ${summary.patients} patients`
    item.appendChild(link)
    list.appendChild(item)
  }
  root.appendChild(list)

  const form = document.createElement('form')
  form.className = 'create-form'
  form.innerHTML = `
    <h3>new session</h3>
    <label>design
      <select name="policy">
        <option value="seeda">safe exploration</option>
        <option value="seeda-plateau">safe exploration, plateau-aware</option>
      </select>
    </label>
    <label>toxicity threshold <input name="theta" value="0.35"></label>
    <label>cohort size <input name="cohort" value="3"></label>
    <label>prior toxicities
      <input name="prior" value="0.02, 0.06, 0.12, 0.20, 0.30, 0.40">
    </label>
    <button type="submit">start session</button>
    <div class="form-error"></div>
  `
  form.addEventListener('submit', async (e) => {
    e.preventDefault()
    const data = new FormData(form)
    const errorBox = form.querySelector('.form-error') as HTMLElement
    const prior = parsePriorList(String(data.get('prior') ?? ''))
    if (prior === null) {
      errorBox.textContent = 'prior toxicities must be a comma-separated list'
      return
    }
    const config: SessionConfig = {
      policy: data.get('policy') as SessionConfig['policy'],
      theta: Number(data.get('theta')),
      cohort_size: Number(data.get('cohort')),
      prior_tox: prior,
    }
    const problems = validateSessionConfig(config)
    if (problems.length > 0) {
      errorBox.textContent = problems.join('; ')
      return
    }
    try {
      const created = await api.createSession(config)
      window.location.hash = `#/sessions/${created.session_id}`
    } catch (err) {
      errorBox.textContent = err instanceof ApiError ? err.message : String(err)
    }
  })
  root.appendChild(form)
}

export async function route(root: HTMLElement): Promise<void> {
  const match = window.location.hash.match(/^#\/sessions\/([0-9a-f]+)$/)
  if (match) {
    await showSession(root, match[1])
  } else {
    await showIndex(root)
  }
}

const rootNode = document.getElementById('app')
if (rootNode) {
  window.addEventListener('hashchange', () => void route(rootNode))
  void route(rootNode)
}
