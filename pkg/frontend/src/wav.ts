// In-browser WAV (16-bit PCM) encoding of raw capture buffers. The
// service accepts completed WAV clips only, so recordings are encoded
// client-side rather than streamed.

export function encodeWavPcm16(samples: Float32Array, sampleRate: number): ArrayBuffer {
  const headerBytes = 44
  const buffer = new ArrayBuffer(headerBytes + samples.length * 2)
  const view = new DataView(buffer)

  const writeAscii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i++) view.setUint8(offset + i, text.charCodeAt(i))
  }

  writeAscii(0, 'RIFF')
  view.setUint32(4, 36 + samples.length * 2, true)
  writeAscii(8, 'WAVE')
  writeAscii(12, 'fmt ')
  view.setUint32(16, 16, true)
  view.setUint16(20, 1, true) // PCM
  view.setUint16(22, 1, true) // mono
  view.setUint32(24, sampleRate, true)
  view.setUint32(28, sampleRate * 2, true)
  view.setUint16(32, 2, true)
  view.setUint16(34, 16, true)
  writeAscii(36, 'data')
  view.setUint32(40, samples.length * 2, true)

  for (let i = 0; i < samples.length; i++) {
    const clamped = Math.max(-1, Math.min(1, samples[i]))
    const value = Math.max(-32768, Math.min(32767, Math.round(clamped * 32768)))
    view.setInt16(44 + i * 2, value, true)
  }
  return buffer
}
