/** Frame preparation: plain bilinear stretch to the backbone's input size
 * (aspect ratio deliberately not preserved) and ImageNet-style channel
 * normalization. */

import { RgbImage } from './png'
import { Tensor, tensor } from './tensor'

export const NORM_MEAN = [0.485, 0.456, 0.406]
export const NORM_STD = [0.229, 0.224, 0.225]

export function resizeBilinear(img: RgbImage, outH: number, outW: number): RgbImage {
  const out = new Float64Array(outH * outW * 3)
  const scaleY = img.height / outH
  const scaleX = img.width / outW
  for (let oi = 0; oi < outH; oi++) {
    // half-pixel centers
    const sy = Math.min(Math.max((oi + 0.5) * scaleY - 0.5, 0), img.height - 1)
    const y0 = Math.floor(sy)
    const y1 = Math.min(y0 + 1, img.height - 1)
    const fy = sy - y0
    for (let oj = 0; oj < outW; oj++) {
      const sx = Math.min(Math.max((oj + 0.5) * scaleX - 0.5, 0), img.width - 1)
      const x0 = Math.floor(sx)
      const x1 = Math.min(x0 + 1, img.width - 1)
      const fx = sx - x0
      for (let ch = 0; ch < 3; ch++) {
        const p00 = img.data[(y0 * img.width + x0) * 3 + ch]
        const p01 = img.data[(y0 * img.width + x1) * 3 + ch]
        const p10 = img.data[(y1 * img.width + x0) * 3 + ch]
        const p11 = img.data[(y1 * img.width + x1) * 3 + ch]
        const top = p00 + (p01 - p00) * fx
        const bot = p10 + (p11 - p10) * fx
        out[(oi * outW + oj) * 3 + ch] = top + (bot - top) * fy
      }
    }
  }
  return { width: outW, height: outH, data: out }
}

/** Interleaved [0,1] RGB to a normalized channel-major tensor. */
export function toInputTensor(img: RgbImage, size: number): Tensor {
  const resized = img.width === size && img.height === size
    ? img : resizeBilinear(img, size, size)
  const t = tensor(3, size, size)
  const area = size * size
  for (let ch = 0; ch < 3; ch++) {
    const mean = NORM_MEAN[ch]
    const inv = 1 / NORM_STD[ch]
    for (let px = 0; px < area; px++) {
      t.data[ch * area + px] = (resized.data[px * 3 + ch] - mean) * inv
    }
  }
  return t
}
