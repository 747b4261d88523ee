/** Minimal Y4M reader: 8-bit 4:2:0 or 4:4:4, full-range BT.601 to RGB. */

import { RgbImage } from './png'

const FOUR_TWO_ZERO = new Set(['420', '420jpeg', '420mpeg2', '420paldv'])

export function readY4m(buf: Buffer): RgbImage[] {
  const nl = buf.indexOf(0x0a)
  if (nl < 0) throw new Error('truncated Y4M header')
  const header = buf.toString('ascii', 0, nl)
  if (!header.startsWith('YUV4MPEG2')) throw new Error('not a Y4M stream')
  let width = 0
  let height = 0
  let subsampling = '420'
  for (const tok of header.split(' ').slice(1)) {
    if (tok[0] === 'W') width = parseInt(tok.slice(1), 10)
    else if (tok[0] === 'H') height = parseInt(tok.slice(1), 10)
    else if (tok[0] === 'C') {
      const tag = tok.slice(1)
      if (FOUR_TWO_ZERO.has(tag)) subsampling = '420'
      else if (tag === '444') subsampling = '444'
      else throw new Error(`unsupported Y4M colorspace ${tag}`)
    }
  }
  if (!width || !height) throw new Error('Y4M header missing W or H')
  const cw = subsampling === '420' ? width / 2 : width
  const ch = subsampling === '420' ? height / 2 : height
  const frameBytes = width * height + 2 * cw * ch

  const frames: RgbImage[] = []
  let pos = nl + 1
  while (pos < buf.length) {
    const markerEnd = buf.indexOf(0x0a, pos)
    if (markerEnd < 0 || buf.toString('ascii', pos, pos + 5) !== 'FRAME') {
      throw new Error(`expected FRAME marker at byte ${pos}`)
    }
    const start = markerEnd + 1
    if (start + frameBytes > buf.length) {
      throw new Error(`truncated frame ${frames.length}`)
    }
    const y = buf.subarray(start, start + width * height)
    const u = buf.subarray(start + width * height, start + width * height + cw * ch)
    const v = buf.subarray(start + width * height + cw * ch, start + frameBytes)
    const data = new Float64Array(width * height * 3)
    for (let i = 0; i < height; i++) {
      for (let j = 0; j < width; j++) {
        const yy = y[i * width + j]
        const ci = subsampling === '420' ? (i >> 1) * cw + (j >> 1) : i * cw + j
        const uu = u[ci] - 128
        const vv = v[ci] - 128
        const px = (i * width + j) * 3
        data[px] = clamp01((yy + 1.402 * vv) / 255)
        data[px + 1] = clamp01((yy - 0.344136 * uu - 0.714136 * vv) / 255)
        data[px + 2] = clamp01((yy + 1.772 * uu) / 255)
      }
    }
    frames.push({ width, height, data })
    pos = start + frameBytes
  }
  return frames
}

function clamp01(v: number): number {
  return v < 0 ? 0 : v > 1 ? 1 : v
}
