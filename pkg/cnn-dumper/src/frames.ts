/** Video discovery and frame decoding (PNG directories and Y4M files). */

import * as fs from 'node:fs'
import * as path from 'node:path'

import { RgbImage, decodePng } from './png'
import { readY4m } from './y4m'

export interface VideoRef {
  id: string
  path: string
}

/** Accepts a .y4m file, a directory of .y4m files, a directory of PNG
 * frames (one video), or a manifest CSV with a header line
 * video_id,path,mos. */
export function discoverVideos(input: string): VideoRef[] {
  const stat = fs.statSync(input)
  if (stat.isFile()) {
    if (input.toLowerCase().endsWith('.csv')) return readManifest(input)
    return [{ id: stem(input), path: input }]
  }
  const names = fs.readdirSync(input).sort()
  const y4ms = names.filter(n => n.toLowerCase().endsWith('.y4m'))
  if (y4ms.length > 0) {
    return y4ms.map(n => ({ id: stem(n), path: path.join(input, n) }))
  }
  if (names.some(n => n.toLowerCase().endsWith('.png'))) {
    return [{ id: path.basename(path.resolve(input)), path: input }]
  }
  throw new Error(`no videos found under ${input}`)
}

function stem(p: string): string {
  const base = path.basename(p)
  const dot = base.lastIndexOf('.')
  return dot > 0 ? base.slice(0, dot) : base
}

function readManifest(file: string): VideoRef[] {
  const lines = fs.readFileSync(file, 'utf8').split('\n').filter(l => l.length > 0)
  if (lines.length === 0 || lines[0].split(',')[0] !== 'video_id') {
    throw new Error(`${file}: expected a manifest CSV with a video_id,path,mos header`)
  }
  const dir = path.dirname(file)
  return lines.slice(1).map(line => {
    const [id, p] = line.split(',')
    const resolved = path.isAbsolute(p) ? p : path.resolve(dir, p)
    return { id, path: resolved }
  })
}

export function readFrames(videoPath: string): RgbImage[] {
  const stat = fs.statSync(videoPath)
  if (stat.isDirectory()) {
    const names = fs.readdirSync(videoPath).filter(n => n.toLowerCase().endsWith('.png')).sort()
    if (names.length === 0) throw new Error(`no PNG frames in ${videoPath}`)
    return names.map(n => decodePng(fs.readFileSync(path.join(videoPath, n))))
  }
  return readY4m(fs.readFileSync(videoPath))
}
