import type {
  DecisionView,
  FinalizeResult,
  SessionConfig,
  SessionListResponse,
  SessionView,
} from './types'

/** Server-side rejection; carries the service's error message verbatim. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message)
    this.name = 'ApiError'
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => null)
  if (!resp.ok) {
    const message =
      body && typeof body.error === 'string'
        ? body.error
        : `request failed with status ${resp.status}`
    throw new ApiError(resp.status, message)
  }
  return body as T
}

/** Thin typed client; every call round-trips to the service (no local state). */
export class ApiClient {
  constructor(
    private readonly base: string = '',
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private request(method: string, path: string, body?: unknown): Promise<Response> {
    return this.fetchImpl(this.base + path, {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    })
  }

  async createSession(config: SessionConfig): Promise<SessionView> {
    return asJson(await this.request('POST', '/sessions', config))
  }

  async listSessions(): Promise<SessionListResponse> {
    return asJson(await this.request('GET', '/sessions'))
  }

  async getSession(sessionId: string): Promise<SessionView> {
    return asJson(await this.request('GET', `/sessions/${sessionId}`))
  }

  async getRecommendation(sessionId: string): Promise<DecisionView> {
    return asJson(await this.request('GET', `/sessions/${sessionId}/recommendation`))
  }

  async postOutcomes(
    sessionId: string,
    dose: number,
    outcomes: [number, number][],
    override = false,
  ): Promise<SessionView> {
    return asJson(
      await this.request('POST', `/sessions/${sessionId}/outcomes`, {
        dose,
        outcomes,
        override,
      }),
    )
  }

  async finalize(sessionId: string): Promise<FinalizeResult> {
    return asJson(await this.request('POST', `/sessions/${sessionId}/finalize`))
  }
}
