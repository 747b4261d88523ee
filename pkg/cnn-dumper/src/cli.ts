/** cnn-dump: run the image backbone over video frames and emit the
 * per-video averaged deep feature CSV.
 *
 *   cnn-dump --input <video|dir|manifest.csv> --out deep.csv
 *            [--backbone densenet201] [--stride 1] [--weights file.f32]
 *            [--seed N] [--per-frame-out file.csv]
 *
 * Weights load from a raw little-endian float32 file in forward-declaration
 * order; without one, a deterministic seeded initialization is used and a
 * notice is printed (features are then structural, not semantic).
 */

import * as fs from 'node:fs'

import { BACKBONES, buildBackbone, extractFeatures, pooledWidth } from './densenet'
import { discoverVideos, readFrames } from './frames'
import { toInputTensor } from './image'
import { deepHeader, formatRow } from './csv'

interface Args {
  input: string
  out: string
  backbone: string
  stride: number
  weights?: string
  seed: number
  perFrameOut?: string
}

function parseArgs(argv: string[]): Args {
  const args: Args = { input: '', out: '', backbone: 'densenet201', stride: 1, seed: 0x5eed }
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i]
    const need = () => {
      if (i + 1 >= argv.length) throw new Error(`${flag} needs a value`)
      return argv[++i]
    }
    switch (flag) {
      case '--input': args.input = need(); break
      case '--out': args.out = need(); break
      case '--backbone': args.backbone = need(); break
      case '--stride': args.stride = parseInt(need(), 10); break
      case '--weights': args.weights = need(); break
      case '--seed': args.seed = parseInt(need(), 10); break
      case '--per-frame-out': args.perFrameOut = need(); break
      case '--help':
        process.stdout.write(
          'usage: cnn-dump --input <video|dir|manifest.csv> --out deep.csv' +
          ' [--backbone densenet201] [--stride N] [--weights file.f32]' +
          ' [--seed N] [--per-frame-out file.csv]\n')
        process.exit(0)
        break
      default:
        throw new Error(`unknown flag ${flag}`)
    }
  }
  if (!args.input || !args.out) throw new Error('--input and --out are required')
  if (!(args.stride >= 1)) throw new Error('--stride must be >= 1')
  return args
}

export function main(argv: string[]): number {
  let args: Args
  try {
    args = parseArgs(argv)
  } catch (err) {
    process.stderr.write(`cnn-dump: ${(err as Error).message}\n`)
    return 2
  }
  const spec = BACKBONES[args.backbone]
  if (!spec) {
    process.stderr.write(
      `cnn-dump: unknown backbone ${args.backbone} (have: ${Object.keys(BACKBONES).join(', ')})\n`)
    return 2
  }
  let weights: Float32Array | undefined
  if (args.weights) {
    const raw = fs.readFileSync(args.weights)
    weights = new Float32Array(raw.buffer, raw.byteOffset, raw.byteLength / 4)
  } else {
    process.stderr.write(
      `cnn-dump: no --weights file given; using seeded random initialization (seed ${args.seed})\n`)
  }
  const model = buildBackbone(spec, weights, args.seed)
  const width = pooledWidth(spec)
  if (model.width !== width) {
    process.stderr.write(`cnn-dump: internal width mismatch ${model.width} != ${width}\n`)
    return 1
  }

  let videos
  try {
    videos = discoverVideos(args.input)
  } catch (err) {
    process.stderr.write(`cnn-dump: ${(err as Error).message}\n`)
    return 2
  }

  const rows: string[] = [deepHeader(width)]
  const perFrameRows: string[] = ['frame,' + deepHeader(width).split(',').slice(1).join(',')]
  let failures = 0
  for (const video of videos) {
    try {
      const frames = readFrames(video.path)
      const pooled = new Float64Array(width)
      let used = 0
      for (let f = 0; f < frames.length; f += args.stride) {
        const feat = extractFeatures(model, toInputTensor(frames[f], spec.inputSize))
        if (feat.length !== width) throw new Error(`backbone emitted ${feat.length} values`)
        for (let i = 0; i < width; i++) pooled[i] += feat[i]
        used += 1
        if (args.perFrameOut) perFrameRows.push(formatRow(String(f), feat))
      }
      if (used === 0) throw new Error('no frames after stride subsampling')
      for (let i = 0; i < width; i++) pooled[i] /= used
      rows.push(formatRow(video.id, pooled))
      process.stderr.write(`${video.id}: ${used} frames\n`)
    } catch (err) {
      failures += 1
      process.stderr.write(`${video.id}: FAILED: ${(err as Error).message}\n`)
    }
  }
  fs.writeFileSync(args.out, rows.join('\n') + '\n')
  if (args.perFrameOut) fs.writeFileSync(args.perFrameOut, perFrameRows.join('\n') + '\n')
  if (failures > 0) {
    process.stderr.write(`${failures} of ${videos.length} videos failed\n`)
    return 1
  }
  return 0
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)))
}
