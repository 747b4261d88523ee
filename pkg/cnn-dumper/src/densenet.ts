/** Densely connected backbone with a global average-pool feature head.
 *
 * The default configuration reproduces the DenseNet-201 topology (stem 64,
 * growth 32, blocks 6/12/48/32, bottleneck 4x, half-width transitions), so
 * the pooled feature width is 1920 by construction. Weights load from a raw
 * float32 file in forward-declaration order, or fall back to a seeded
 * He-normal initialization so runs are deterministic without a weights file.
 */

import { gaussianStream } from './prng'
import {
  Tensor, avgpool2d, batchnormRelu, concatChannels, conv2d, globalAvgPool,
  maxpool2d,
} from './tensor'

export interface BackboneSpec {
  name: string
  stem: number
  growth: number
  bnSize: number
  blocks: number[]
  inputSize: number
}

export const BACKBONES: Record<string, BackboneSpec> = {
  densenet201: {
    name: 'densenet201', stem: 64, growth: 32, bnSize: 4,
    blocks: [6, 12, 48, 32], inputSize: 224,
  },
  // small stand-in with the same topology, for fast tests
  tiny: {
    name: 'tiny', stem: 16, growth: 8, bnSize: 2,
    blocks: [2, 2], inputSize: 64,
  },
}

export function pooledWidth(spec: BackboneSpec): number {
  let c = spec.stem
  for (let b = 0; b < spec.blocks.length; b++) {
    c += spec.blocks[b] * spec.growth
    if (b !== spec.blocks.length - 1) c = Math.floor(c / 2)
  }
  return c
}

interface Bn { scale: Float32Array; shift: Float32Array }
interface DenseLayer { bn1: Bn; conv1: Float32Array; bn2: Bn; conv2: Float32Array; cIn: number }
interface Transition { bn: Bn; conv: Float32Array; cIn: number; cOut: number }

export interface Backbone {
  spec: BackboneSpec
  conv0: Float32Array
  bn0: Bn
  blocks: DenseLayer[][]
  transitions: Transition[]
  bnFinal: Bn
  width: number
}

interface WeightSource {
  conv(outC: number, fanIn: number): Float32Array
  bn(c: number): Bn
  done(): void
}

function seededSource(seed: number): WeightSource {
  const next = gaussianStream(seed)
  return {
    conv(outC, fanIn) {
      const w = new Float32Array(outC * fanIn)
      const std = Math.sqrt(2.0 / fanIn)
      for (let i = 0; i < w.length; i++) w[i] = next() * std
      return w
    },
    bn(c) {
      // folded inference batchnorm: identity transform
      const scale = new Float32Array(c).fill(1)
      const shift = new Float32Array(c)
      return { scale, shift }
    },
    done() {},
  }
}

function fileSource(data: Float32Array): WeightSource {
  let pos = 0
  const take = (n: number) => {
    if (pos + n > data.length) {
      throw new Error(
        `weights file exhausted: need ${n} more values at offset ${pos}, have ${data.length}`)
    }
    const out = data.subarray(pos, pos + n)
    pos += n
    return new Float32Array(out)
  }
  return {
    conv: (outC, fanIn) => take(outC * fanIn),
    bn: (c) => ({ scale: take(c), shift: take(c) }),
    done() {
      if (pos !== data.length) {
        throw new Error(`weights file has ${data.length - pos} unread values`)
      }
    },
  }
}

export function buildBackbone(
  spec: BackboneSpec, weights?: Float32Array, seed = 0x5eed,
): Backbone {
  const src = weights ? fileSource(weights) : seededSource(seed)
  const conv0 = src.conv(spec.stem, 3 * 7 * 7)
  const bn0 = src.bn(spec.stem)
  const blocks: DenseLayer[][] = []
  const transitions: Transition[] = []
  let c = spec.stem
  const mid = spec.bnSize * spec.growth
  for (let b = 0; b < spec.blocks.length; b++) {
    const layers: DenseLayer[] = []
    for (let l = 0; l < spec.blocks[b]; l++) {
      layers.push({
        cIn: c,
        bn1: src.bn(c),
        conv1: src.conv(mid, c),
        bn2: src.bn(mid),
        conv2: src.conv(spec.growth, mid * 3 * 3),
      })
      c += spec.growth
    }
    blocks.push(layers)
    if (b !== spec.blocks.length - 1) {
      const cOut = Math.floor(c / 2)
      transitions.push({ cIn: c, cOut, bn: src.bn(c), conv: src.conv(cOut, c) })
      c = cOut
    }
  }
  const bnFinal = src.bn(c)
  src.done()
  return { spec, conv0, bn0, blocks, transitions, bnFinal, width: c }
}

function denseLayerForward(x: Tensor, layer: DenseLayer, growth: number, bnSize: number): Tensor {
  let t = batchnormRelu(x, layer.bn1.scale, layer.bn1.shift, true)
  t = conv2d(t, layer.conv1, bnSize * growth, 1, 1, 1, 0)
  t = batchnormRelu(t, layer.bn2.scale, layer.bn2.shift, true)
  return conv2d(t, layer.conv2, growth, 3, 3, 1, 1)
}

/** Forward pass: 3 x S x S normalized input to the pooled feature vector. */
export function extractFeatures(model: Backbone, input: Tensor): Float32Array {
  const { spec } = model
  let x = conv2d(input, model.conv0, spec.stem, 7, 7, 2, 3)
  x = batchnormRelu(x, model.bn0.scale, model.bn0.shift, true)
  x = maxpool2d(x, 3, 2, 1)
  for (let b = 0; b < model.blocks.length; b++) {
    for (const layer of model.blocks[b]) {
      x = concatChannels(x, denseLayerForward(x, layer, spec.growth, spec.bnSize))
    }
    if (b !== model.blocks.length - 1) {
      const tr = model.transitions[b]
      x = batchnormRelu(x, tr.bn.scale, tr.bn.shift, true)
      x = conv2d(x, tr.conv, tr.cOut, 1, 1, 1, 0)
      x = avgpool2d(x, 2, 2)
    }
  }
  x = batchnormRelu(x, model.bnFinal.scale, model.bnFinal.shift, true)
  return globalAvgPool(x)
}
