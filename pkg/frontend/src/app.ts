// Single-page UI: upload a recording or capture one live, submit it to
// the prediction service, and browse recent results. One prediction is
// in flight at a time; submit controls stay disabled while pending.

import { ApiClient, ApiError, PredictionResult } from './api.js'
import { CaptureSource, PermissionDeniedError, Recorder } from './recorder.js'

const MIN_RECORDING_S = 1.0
const HISTORY_LIMIT = 10

const ERROR_MESSAGES: Record<string, string> = {
  MALFORMED_AUDIO: 'That file does not look like audio. Please choose a WAV recording.',
  UNSUPPORTED_FORMAT: 'Unsupported audio format. Please upload a WAV file.',
  PAYLOAD_TOO_LARGE: 'The recording is too large. Please upload a shorter clip.',
  BACKEND_UNAVAILABLE: 'The analysis engine is offline. Please try again later.',
  MODEL_NOT_FOUND: 'No trained model is available on the server.',
}

const SNAPSHOT_LABELS: Record<string, string> = {
  avg_word_len_chars: 'Avg word length (chars)',
  avg_sentence_len_words: 'Avg sentence length (words)',
  speech_rate_wpm: 'Speech rate (wpm)',
  english_ratio: 'English share',
  hindi_ratio: 'Hindi share',
  other_ratio: 'Other share',
  switch_count: 'Language switches',
  switch_rate_per_min: 'Switches per minute',
}

export function formatProbability(probability: number): string {
  return `${(probability * 100).toFixed(1)}%`
}

export class App {
  private recorder?: Recorder
  private pending = false
  private ticker?: ReturnType<typeof setInterval>

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private captureFactory: () => CaptureSource,
  ) {
    this.render()
    this.bind()
  }

  private el<T extends HTMLElement>(selector: string): T {
    const found = this.root.querySelector<T>(selector)
    if (!found) throw new Error(`missing element ${selector}`)
    return found
  }

  private render(): void {
    this.root.innerHTML = `
      <header>
        <h1>NeuRO</h1>
        <p class="subtitle">Speech screening for code-switched (English/Hindi) child speech</p>
      </header>
      <main>
        <section class="panel" id="upload-panel">
          <h2>Audio from device</h2>
          <input type="file" id="upload-input" accept="audio/wav,audio/*">
          <button id="upload-button" disabled>Analyze recording</button>
        </section>
        <section class="panel" id="record-panel">
          <h2>Real-time recording</h2>
          <button id="record-start">Start recording</button>
          <button id="record-stop" disabled>Stop &amp; analyze</button>
          <span id="record-elapsed" hidden>0.0 s</span>
          <p id="record-hint" class="hint" hidden></p>
        </section>
        <section class="panel" id="result-panel" hidden>
          <h2>Result</h2>
          <div id="result-card">
            <p class="verdict"><span id="result-label"></span>
               <span id="result-probability"></span></p>
            <p class="model-line">model <code id="result-model"></code>
               · <span id="result-feature-kind"></span></p>
            <table id="result-snapshot"><tbody></tbody></table>
            <p class="disclaimer">Screening aid, not a diagnosis. Consult a
               clinician for any concerns.</p>
          </div>
        </section>
        <section class="panel">
          <h2>History</h2>
          <p id="history-empty" hidden>No predictions yet.</p>
          <table id="history-table" hidden>
            <thead><tr><th>When</th><th>Label</th><th>Probability</th></tr></thead>
            <tbody id="history-body"></tbody>
          </table>
        </section>
        <p id="error-box" class="error" hidden></p>
      </main>`
  }

  private bind(): void {
    const input = this.el<HTMLInputElement>('#upload-input')
    const uploadButton = this.el<HTMLButtonElement>('#upload-button')
    input.addEventListener('change', () => {
      uploadButton.disabled = this.pending || !input.files || input.files.length === 0
    })
    uploadButton.addEventListener('click', () => {
      const file = input.files && input.files[0]
      if (file) void this.submit(file, file.name)
    })
    this.el('#record-start').addEventListener('click', () => void this.startRecording())
    this.el('#record-stop').addEventListener('click', () => void this.stopRecording())
  }

  async init(): Promise<void> {
    await this.refreshHistory()
  }

  private setPending(pending: boolean): void {
    this.pending = pending
    const input = this.el<HTMLInputElement>('#upload-input')
    this.el<HTMLButtonElement>('#upload-button').disabled =
      pending || !input.files || input.files.length === 0
    this.el<HTMLButtonElement>('#record-start').disabled =
      pending || this.recorder !== undefined
  }

  private showError(message: string): void {
    const box = this.el('#error-box')
    box.textContent = message
    box.hidden = false
  }

  private clearError(): void {
    this.el('#error-box').hidden = true
  }

  async submit(audio: Blob, filename: string): Promise<void> {
    if (this.pending) return
    this.clearError()
    this.setPending(true)
    try {
      const result = await this.api.predict(audio, filename)
      this.renderResult(result)
      await this.refreshHistory()
    } catch (err) {
      if (err instanceof ApiError) {
        this.showError(ERROR_MESSAGES[err.code] ?? `Request failed: ${err.detail}`)
      } else {
        this.showError('Could not reach the service.')
      }
    } finally {
      this.setPending(false)
    }
  }

  private renderResult(result: PredictionResult): void {
    this.el('#result-panel').hidden = false
    this.el('#result-label').textContent =
      result.label === 'PT' ? 'PT (potential signs)' : 'HC (healthy control)'
    this.el('#result-probability').textContent = formatProbability(result.probability)
    this.el('#result-model').textContent = result.model_id
    this.el('#result-feature-kind').textContent = result.feature_kind.toLowerCase()
    const body = this.el('#result-snapshot').querySelector('tbody')!
    body.innerHTML = ''
    for (const [key, label] of Object.entries(SNAPSHOT_LABELS)) {
      const value = result.linguistic_snapshot[key]
      if (value === undefined) continue
      const row = document.createElement('tr')
      row.innerHTML = `<td>${label}</td><td>${Number(value).toFixed(2)}</td>`
      body.appendChild(row)
    }
  }

  async refreshHistory(): Promise<void> {
    let records: PredictionResult[]
    try {
      records = await this.api.predictions(HISTORY_LIMIT)
    } catch {
      return // history is best-effort; prediction flow already reports errors
    }
    const empty = this.el('#history-empty')
    const table = this.el('#history-table')
    const body = this.el('#history-body')
    body.innerHTML = ''
    empty.hidden = records.length > 0
    table.hidden = records.length === 0
    for (const record of records) {
      const row = document.createElement('tr')
      row.innerHTML =
        `<td>${record.created_at}</td>` +
        `<td>${record.label}</td>` +
        `<td>${formatProbability(record.probability)}</td>`
      body.appendChild(row)
    }
  }

  private setRecordingUi(recording: boolean): void {
    this.el<HTMLButtonElement>('#record-start').disabled = recording || this.pending
    this.el<HTMLButtonElement>('#record-stop').disabled = !recording
    this.el('#record-elapsed').hidden = !recording
  }

  async startRecording(): Promise<void> {
    if (this.recorder || this.pending) return
    this.clearError()
    this.el('#record-hint').hidden = true
    const recorder = new Recorder(this.captureFactory())
    try {
      await recorder.start()
    } catch (err) {
      if (err instanceof PermissionDeniedError) {
        this.showError('Microphone access was denied. Allow microphone use '
          + 'in your browser settings, or upload a file instead.')
      } else {
        this.showError('Could not start recording.')
      }
      return
    }
    this.recorder = recorder
    this.setRecordingUi(true)
    this.ticker = setInterval(() => {
      this.el('#record-elapsed').textContent = `${recorder.elapsedS().toFixed(1)} s`
    }, 200)
  }

  async stopRecording(): Promise<void> {
    if (!this.recorder) return
    const recorder = this.recorder
    this.recorder = undefined
    if (this.ticker) clearInterval(this.ticker)
    this.setRecordingUi(false)
    const { wav, durationS } = await recorder.stop()
    if (durationS < MIN_RECORDING_S) {
      const hint = this.el('#record-hint')
      hint.textContent =
        `Recording was ${durationS.toFixed(1)} s; please record at least 1 second.`
      hint.hidden = false
      return
    }
    await this.submit(new Blob([wav], { type: 'audio/wav' }), 'recording.wav')
  }
}

export function createApp(root: HTMLElement, api: ApiClient,
                          captureFactory: () => CaptureSource): App {
  return new App(root, api, captureFactory)
}
