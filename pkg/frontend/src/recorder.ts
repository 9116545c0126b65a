// Microphone capture and clip assembly. The capture source is injectable
// so tests can feed synthetic sample buffers without browser audio APIs.

import { encodeWavPcm16 } from './wav.js'

export interface CaptureSource {
  /** Begin delivering Float32 chunks; resolves with the sample rate. */
  start(onChunk: (chunk: Float32Array) => void): Promise<number>
  stop(): Promise<void>
}

export class PermissionDeniedError extends Error {
  constructor() {
    super('microphone permission denied')
  }
}

export class MicrophoneCapture implements CaptureSource {
  private stream?: MediaStream
  private context?: AudioContext
  private processor?: ScriptProcessorNode

  async start(onChunk: (chunk: Float32Array) => void): Promise<number> {
    try {
      this.stream = await navigator.mediaDevices.getUserMedia({ audio: true })
    } catch (err) {
      if (err instanceof DOMException && err.name === 'NotAllowedError') {
        throw new PermissionDeniedError()
      }
      throw err
    }
    this.context = new AudioContext()
    const source = this.context.createMediaStreamSource(this.stream)
    this.processor = this.context.createScriptProcessor(4096, 1, 1)
    this.processor.onaudioprocess = (event) => {
      onChunk(new Float32Array(event.inputBuffer.getChannelData(0)))
    }
    source.connect(this.processor)
    this.processor.connect(this.context.destination)
    return this.context.sampleRate
  }

  async stop(): Promise<void> {
    this.processor?.disconnect()
    this.stream?.getTracks().forEach((track) => track.stop())
    await this.context?.close()
    this.stream = undefined
    this.context = undefined
    this.processor = undefined
  }
}

export interface Recording {
  wav: ArrayBuffer
  durationS: number
}

export class Recorder {
  private chunks: Float32Array[] = []
  private sampleRate = 0
  private recording = false

  constructor(private source: CaptureSource) {}

  get isRecording(): boolean {
    return this.recording
  }

  /** Seconds captured so far, derived from sample counts. */
  elapsedS(): number {
    if (this.sampleRate === 0) return 0
    const total = this.chunks.reduce((n, c) => n + c.length, 0)
    return total / this.sampleRate
  }

  async start(): Promise<void> {
    if (this.recording) throw new Error('already recording')
    this.chunks = []
    this.sampleRate = await this.source.start((chunk) => {
      this.chunks.push(chunk)
    })
    this.recording = true
  }

  async stop(): Promise<Recording> {
    if (!this.recording) throw new Error('not recording')
    this.recording = false
    await this.source.stop()
    const total = this.chunks.reduce((n, c) => n + c.length, 0)
    const samples = new Float32Array(total)
    let offset = 0
    for (const chunk of this.chunks) {
      samples.set(chunk, offset)
      offset += chunk.length
    }
    return {
      wav: encodeWavPcm16(samples, this.sampleRate),
      durationS: total / this.sampleRate,
    }
  }
}
