import * as zlib from 'node:zlib'

/** Tiny PNG encoder (filter 0, truecolor 8-bit) for test fixtures. */
export function encodePng(width: number, height: number, rgb: Uint8Array): Buffer {
  const stride = width * 3
  const raw = Buffer.alloc(height * (stride + 1))
  for (let row = 0; row < height; row++) {
    raw[row * (stride + 1)] = 0
    Buffer.from(rgb.subarray(row * stride, (row + 1) * stride))
      .copy(raw, row * (stride + 1) + 1)
  }
  const ihdr = Buffer.alloc(13)
  ihdr.writeUInt32BE(width, 0)
  ihdr.writeUInt32BE(height, 4)
  ihdr[8] = 8 // bit depth
  ihdr[9] = 2 // truecolor
  const chunks = [
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk('IHDR', ihdr),
    chunk('IDAT', zlib.deflateSync(raw)),
    chunk('IEND', Buffer.alloc(0)),
  ]
  return Buffer.concat(chunks)
}

function chunk(type: string, body: Buffer): Buffer {
  const head = Buffer.alloc(4)
  head.writeUInt32BE(body.length, 0)
  const typeBuf = Buffer.from(type, 'latin1')
  const crc = Buffer.alloc(4)
  crc.writeUInt32BE(zlib.crc32(Buffer.concat([typeBuf, body])), 0)
  return Buffer.concat([head, typeBuf, body, crc])
}

/** Gray 4:2:0 Y4M stream for parser tests. */
export function grayY4m(frames: number, value = 128, w = 4, h = 4): Buffer {
  const parts = [Buffer.from(`YUV4MPEG2 W${w} H${h} F30:1 Ip A1:1 C420jpeg\n`, 'ascii')]
  for (let f = 0; f < frames; f++) {
    parts.push(Buffer.from('FRAME\n', 'ascii'))
    parts.push(Buffer.alloc(w * h, value))
    parts.push(Buffer.alloc((w * h) / 2, 128))
  }
  return Buffer.concat(parts)
}
