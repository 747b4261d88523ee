/** Minimal PNG decoder: truecolor RGB/RGBA, 8- or 16-bit, non-interlaced. */

import * as zlib from 'node:zlib'

export interface RgbImage {
  width: number
  height: number
  /** interleaved RGB in [0, 1], row-major */
  data: Float64Array
}

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a])

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c
  const pa = Math.abs(p - a)
  const pb = Math.abs(p - b)
  const pc = Math.abs(p - c)
  if (pa <= pb && pa <= pc) return a
  return pb <= pc ? b : c
}

export function decodePng(buf: Buffer): RgbImage {
  if (!buf.subarray(0, 8).equals(SIGNATURE)) throw new Error('missing PNG signature')
  let pos = 8
  let ihdr: { w: number; h: number; depth: number; colorType: number } | null = null
  const idat: Buffer[] = []
  while (pos < buf.length) {
    const length = buf.readUInt32BE(pos)
    const type = buf.toString('latin1', pos + 4, pos + 8)
    const body = buf.subarray(pos + 8, pos + 8 + length)
    if (type === 'IHDR') {
      const interlace = body[12]
      if (interlace !== 0) throw new Error('interlaced PNG not supported')
      ihdr = {
        w: body.readUInt32BE(0),
        h: body.readUInt32BE(4),
        depth: body[8],
        colorType: body[9],
      }
    } else if (type === 'IDAT') {
      idat.push(body)
    } else if (type === 'IEND') {
      break
    }
    pos += 12 + length
  }
  if (!ihdr) throw new Error('missing IHDR chunk')
  const { w, h, depth, colorType } = ihdr
  if (colorType !== 2 && colorType !== 6) {
    throw new Error(`unsupported PNG color type ${colorType} (need RGB or RGBA)`)
  }
  if (depth !== 8 && depth !== 16) throw new Error(`unsupported PNG bit depth ${depth}`)
  const channels = colorType === 2 ? 3 : 4
  const bpp = channels * (depth / 8)
  const stride = w * bpp
  const raw = zlib.inflateSync(Buffer.concat(idat))
  if (raw.length !== h * (stride + 1)) throw new Error('PNG pixel data has wrong length')

  const recon = Buffer.alloc(h * stride)
  let prevRow = Buffer.alloc(stride)
  for (let row = 0; row < h; row++) {
    const filter = raw[row * (stride + 1)]
    const line = Buffer.from(
      raw.subarray(row * (stride + 1) + 1, (row + 1) * (stride + 1)))
    switch (filter) {
      case 0:
        break
      case 1:
        for (let i = bpp; i < stride; i++) line[i] = (line[i] + line[i - bpp]) & 0xff
        break
      case 2:
        for (let i = 0; i < stride; i++) line[i] = (line[i] + prevRow[i]) & 0xff
        break
      case 3:
        for (let i = 0; i < stride; i++) {
          const a = i >= bpp ? line[i - bpp] : 0
          line[i] = (line[i] + ((a + prevRow[i]) >> 1)) & 0xff
        }
        break
      case 4:
        for (let i = 0; i < stride; i++) {
          const a = i >= bpp ? line[i - bpp] : 0
          const c = i >= bpp ? prevRow[i - bpp] : 0
          line[i] = (line[i] + paeth(a, prevRow[i], c)) & 0xff
        }
        break
      default:
        throw new Error(`unknown PNG filter ${filter} in row ${row}`)
    }
    line.copy(recon, row * stride)
    prevRow = line
  }

  const out = new Float64Array(w * h * 3)
  const maxVal = depth === 16 ? 65535 : 255
  for (let px = 0; px < w * h; px++) {
    for (let ch = 0; ch < 3; ch++) {
      const idx = px * bpp + ch * (depth / 8)
      const v = depth === 16 ? recon.readUInt16BE(idx) : recon[idx]
      out[px * 3 + ch] = v / maxVal
    }
  }
  return { width: w, height: h, data: out }
}
