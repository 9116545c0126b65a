// Typed client for the prediction service REST API. Every displayed
// label/probability originates from these endpoints; the UI performs no
// classification of its own.

export interface PredictionResult {
  request_id: string
  label: 'PT' | 'HC'
  probability: number
  model_id: string
  feature_kind: string
  linguistic_snapshot: Record<string, number>
  timing_ms: Record<string, number>
  created_at: string
}

export interface ModelEntry {
  model_id: string
  family: string
  feature_kind: string
  mean_accuracy: number | null
  mean_macro_f1: number | null
  created_at: string
}

export interface HealthInfo {
  status: string
  backends: Record<string, string>
  model_count: number
  capabilities: Record<string, boolean>
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: string,
  ) {
    super(`${code}: ${detail}`)
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = 'UNKNOWN'
  let detail = response.statusText
  try {
    const body = await response.json()
    if (body && typeof body.error === 'string') code = body.error
    if (body && typeof body.detail === 'string') detail = body.detail
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, detail)
}

export class ApiClient {
  constructor(
    private baseUrl = '',
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`)
    if (!response.ok) throw await toApiError(response)
    return (await response.json()) as T
  }

  async predict(audio: Blob, filename: string, modelId?: string): Promise<PredictionResult> {
    const form = new FormData()
    form.append('audio', audio, filename)
    if (modelId) form.append('model_id', modelId)
    const response = await this.fetchFn(`${this.baseUrl}/api/predict`, {
      method: 'POST',
      body: form,
    })
    if (!response.ok) throw await toApiError(response)
    return (await response.json()) as PredictionResult
  }

  async predictions(limit = 10): Promise<PredictionResult[]> {
    return this.getJson(`/api/predictions?limit=${limit}`)
  }

  async models(): Promise<ModelEntry[]> {
    return this.getJson('/api/models')
  }

  async health(): Promise<HealthInfo> {
    return this.getJson('/api/health')
  }
}
