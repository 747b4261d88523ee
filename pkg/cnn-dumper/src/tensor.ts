/** Minimal channel-major (CHW) float32 tensors and the handful of ops the
 * backbone needs. Convolutions go through im2col plus a blocked matrix
 * multiply, which is where nearly all inference time is spent. */

export interface Tensor {
  data: Float32Array
  c: number
  h: number
  w: number
}

export function tensor(c: number, h: number, w: number): Tensor {
  return { data: new Float32Array(c * h * w), c, h, w }
}

/** out[m][n] = sum_k a[m][k] * b[k][n]; plain blocked loops. */
export function matmul(
  a: Float32Array, b: Float32Array, m: number, k: number, n: number,
): Float32Array {
  const out = new Float32Array(m * n)
  const BLOCK = 48
  for (let k0 = 0; k0 < k; k0 += BLOCK) {
    const kEnd = Math.min(k0 + BLOCK, k)
    for (let i = 0; i < m; i++) {
      const aRow = i * k
      const oRow = i * n
      for (let kk = k0; kk < kEnd; kk++) {
        const av = a[aRow + kk]
        if (av === 0) continue
        const bRow = kk * n
        for (let j = 0; j < n; j++) {
          out[oRow + j] += av * b[bRow + j]
        }
      }
    }
  }
  return out
}

/** Unfold kh x kw patches (zero padding) into an [c*kh*kw, outH*outW] matrix. */
export function im2col(
  x: Tensor, kh: number, kw: number, stride: number, pad: number,
): { cols: Float32Array; outH: number; outW: number } {
  const outH = Math.floor((x.h + 2 * pad - kh) / stride) + 1
  const outW = Math.floor((x.w + 2 * pad - kw) / stride) + 1
  const cols = new Float32Array(x.c * kh * kw * outH * outW)
  const area = outH * outW
  for (let c = 0; c < x.c; c++) {
    const plane = c * x.h * x.w
    for (let ki = 0; ki < kh; ki++) {
      for (let kj = 0; kj < kw; kj++) {
        const row = ((c * kh + ki) * kw + kj) * area
        for (let oi = 0; oi < outH; oi++) {
          const si = oi * stride + ki - pad
          if (si < 0 || si >= x.h) continue
          const srcRow = plane + si * x.w
          const dstRow = row + oi * outW
          for (let oj = 0; oj < outW; oj++) {
            const sj = oj * stride + kj - pad
            if (sj >= 0 && sj < x.w) cols[dstRow + oj] = x.data[srcRow + sj]
          }
        }
      }
    }
  }
  return { cols, outH, outW }
}

/** weight layout: [outC, inC * kh * kw], torch-style, no bias. */
export function conv2d(
  x: Tensor, weight: Float32Array, outC: number,
  kh: number, kw: number, stride: number, pad: number,
): Tensor {
  if (kh === 1 && kw === 1 && stride === 1 && pad === 0) {
    const area = x.h * x.w
    return { data: matmul(weight, x.data, outC, x.c, area), c: outC, h: x.h, w: x.w }
  }
  const { cols, outH, outW } = im2col(x, kh, kw, stride, pad)
  const data = matmul(weight, cols, outC, x.c * kh * kw, outH * outW)
  return { data, c: outC, h: outH, w: outW }
}

/** Inference-mode batchnorm folded to a per-channel scale and shift,
 * optionally fused with ReLU. */
export function batchnormRelu(
  x: Tensor, scale: Float32Array, shift: Float32Array, relu: boolean,
): Tensor {
  const out = tensor(x.c, x.h, x.w)
  const area = x.h * x.w
  for (let c = 0; c < x.c; c++) {
    const s = scale[c]
    const b = shift[c]
    const base = c * area
    for (let i = 0; i < area; i++) {
      let v = x.data[base + i] * s + b
      if (relu && v < 0) v = 0
      out.data[base + i] = v
    }
  }
  return out
}

export function maxpool2d(x: Tensor, k: number, stride: number, pad: number): Tensor {
  const outH = Math.floor((x.h + 2 * pad - k) / stride) + 1
  const outW = Math.floor((x.w + 2 * pad - k) / stride) + 1
  const out = tensor(x.c, outH, outW)
  for (let c = 0; c < x.c; c++) {
    const plane = c * x.h * x.w
    const oPlane = c * outH * outW
    for (let oi = 0; oi < outH; oi++) {
      for (let oj = 0; oj < outW; oj++) {
        let best = -Infinity
        for (let ki = 0; ki < k; ki++) {
          const si = oi * stride + ki - pad
          if (si < 0 || si >= x.h) continue
          for (let kj = 0; kj < k; kj++) {
            const sj = oj * stride + kj - pad
            if (sj < 0 || sj >= x.w) continue
            const v = x.data[plane + si * x.w + sj]
            if (v > best) best = v
          }
        }
        out.data[oPlane + oi * outW + oj] = best
      }
    }
  }
  return out
}

export function avgpool2d(x: Tensor, k: number, stride: number): Tensor {
  const outH = Math.floor((x.h - k) / stride) + 1
  const outW = Math.floor((x.w - k) / stride) + 1
  const out = tensor(x.c, outH, outW)
  const inv = 1 / (k * k)
  for (let c = 0; c < x.c; c++) {
    const plane = c * x.h * x.w
    const oPlane = c * outH * outW
    for (let oi = 0; oi < outH; oi++) {
      for (let oj = 0; oj < outW; oj++) {
        let acc = 0
        for (let ki = 0; ki < k; ki++) {
          const srcRow = plane + (oi * stride + ki) * x.w + oj * stride
          for (let kj = 0; kj < k; kj++) acc += x.data[srcRow + kj]
        }
        out.data[oPlane + oi * outW + oj] = acc * inv
      }
    }
  }
  return out
}

export function globalAvgPool(x: Tensor): Float32Array {
  const out = new Float32Array(x.c)
  const area = x.h * x.w
  for (let c = 0; c < x.c; c++) {
    let acc = 0
    const base = c * area
    for (let i = 0; i < area; i++) acc += x.data[base + i]
    out[c] = acc / area
  }
  return out
}

export function concatChannels(a: Tensor, b: Tensor): Tensor {
  const out = tensor(a.c + b.c, a.h, a.w)
  out.data.set(a.data, 0)
  out.data.set(b.data, a.data.length)
  return out
}
