/** Deep feature CSV writer: header video_id,d0000..dNNNN, one row per
 * video, shortest round-trip decimals. Matches the consumer's schema
 * bit-for-bit in structure. */

export function deepHeader(dim: number): string {
  const cols = ['video_id']
  for (let i = 0; i < dim; i++) cols.push('d' + String(i).padStart(4, '0'))
  return cols.join(',')
}

export function formatRow(id: string, vec: ArrayLike<number>): string {
  const parts = [id]
  for (let i = 0; i < vec.length; i++) {
    const v = vec[i]
    if (!Number.isFinite(v)) throw new Error(`non-finite feature ${i} for ${id}`)
    parts.push(numberToCsv(v))
  }
  return parts.join(',')
}

/** JS toString is shortest-round-trip but prints integers bare; the
 * consumer parses floats either way, keep it simple and explicit. */
export function numberToCsv(v: number): string {
  const s = v.toString()
  return Number.isInteger(v) && !s.includes('e') && !s.includes('.') ? s + '.0' : s
}
