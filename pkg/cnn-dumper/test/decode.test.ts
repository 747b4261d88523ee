import { describe, expect, it } from 'vitest'

import { decodePng } from '../src/png'
import { readY4m } from '../src/y4m'
import { resizeBilinear } from '../src/image'
import { deepHeader, formatRow, numberToCsv } from '../src/csv'
import { encodePng, grayY4m } from './helpers'

describe('png decoder', () => {
  it('round-trips raw pixel values', () => {
    const rgb = new Uint8Array([255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30])
    const img = decodePng(encodePng(2, 2, rgb))
    expect(img.width).toBe(2)
    expect(img.height).toBe(2)
    expect(img.data[0]).toBeCloseTo(1.0, 12)
    expect(img.data[4]).toBeCloseTo(1.0, 12)
    expect(img.data[9]).toBeCloseTo(10 / 255, 12)
    expect(img.data[11]).toBeCloseTo(30 / 255, 12)
  })

  it('rejects junk', () => {
    expect(() => decodePng(Buffer.from('not a png'))).toThrow(/signature/)
  })
})

describe('y4m reader', () => {
  it('decodes gray frames to gray rgb', () => {
    const frames = readY4m(grayY4m(2))
    expect(frames).toHaveLength(2)
    for (const px of [0, 5, 15]) {
      expect(frames[0].data[px * 3]).toBeCloseTo(128 / 255, 9)
      expect(frames[0].data[px * 3 + 1]).toBeCloseTo(128 / 255, 9)
      expect(frames[0].data[px * 3 + 2]).toBeCloseTo(128 / 255, 9)
    }
  })

  it('rejects truncated frames', () => {
    const buf = grayY4m(2)
    expect(() => readY4m(buf.subarray(0, buf.length - 4))).toThrow(/truncated frame 1/)
  })
})

describe('bilinear resize', () => {
  it('keeps constant images constant', () => {
    const img = { width: 5, height: 3, data: new Float64Array(45).fill(0.25) }
    const out = resizeBilinear(img, 7, 9)
    for (const v of out.data) expect(v).toBeCloseTo(0.25, 12)
  })

  it('stretches without preserving aspect', () => {
    const data = new Float64Array(2 * 2 * 3)
    data.set([0, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 1]) // gradient columns
    const out = resizeBilinear({ width: 2, height: 2, data }, 4, 8)
    expect(out.width).toBe(8)
    expect(out.height).toBe(4)
    // monotone along each row
    for (let j = 1; j < 8; j++) {
      expect(out.data[j * 3]).toBeGreaterThanOrEqual(out.data[(j - 1) * 3])
    }
  })
})

describe('csv format', () => {
  it('writes the schema header', () => {
    const header = deepHeader(1920)
    const cols = header.split(',')
    expect(cols).toHaveLength(1921)
    expect(cols[0]).toBe('video_id')
    expect(cols[1]).toBe('d0000')
    expect(cols[1920]).toBe('d1919')
  })

  it('keeps decimals parseable as floats', () => {
    expect(numberToCsv(1)).toBe('1.0')
    expect(numberToCsv(0.125)).toBe('0.125')
    expect(formatRow('v', [1, 0.5])).toBe('v,1.0,0.5')
    expect(() => formatRow('v', [Number.NaN])).toThrow(/non-finite/)
  })
})
