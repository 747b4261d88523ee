"""Video and dataset input: Y4M streams, PNG frame directories, manifest CSVs.

Only uncompressed inputs are handled here. Compressed codecs are expected to
be transcoded externally, e.g.::

    ffmpeg -i input.mp4 -pix_fmt yuv420p output.y4m

Decoded frames are planar float64 arrays in [0, 1]; decoding is deterministic
(identical bytes give bit-identical planes).
"""

from __future__ import annotations

import csv
import os
import re
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np


class Y4mError(ValueError):
    """Malformed or truncated Y4M stream."""


class PngError(ValueError):
    """Malformed or unsupported PNG file."""


class ManifestError(ValueError):
    """Malformed dataset manifest."""


@dataclass
class RgbFrame:
    """One decoded video frame as three same-sized planes in [0, 1]."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray
    index: int = 0

    @property
    def height(self) -> int:
        return self.r.shape[0]

    @property
    def width(self) -> int:
        return self.r.shape[1]

    def validate(self) -> None:
        if not (self.r.shape == self.g.shape == self.b.shape):
            raise ValueError("RGB planes must share dimensions")
        for p in (self.r, self.g, self.b):
            if p.min() < 0.0 or p.max() > 1.0:
                raise ValueError("RGB samples must lie in [0, 1]")


@dataclass
class YuvFrame:
    """Raw 8-bit planar YUV frame as stored in a Y4M stream."""

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray
    index: int = 0


@dataclass
class Y4mHeader:
    width: int
    height: int
    fps: tuple[int, int] = (30, 1)
    subsampling: str = "420"  # "420" or "444"
    extra: str = ""


# Full-range YUV -> RGB coefficients, keyed by matrix name.
# Each entry: (v_for_r, u_for_g, v_for_g, u_for_b).
_YUV_MATRICES = {
    "bt601": (1.402, 0.344136, 0.714136, 1.772),
    "bt709": (1.5748, 0.187324, 0.468124, 1.8556),
}

_420_TAGS = {"420", "420jpeg", "420mpeg2", "420paldv"}


def _parse_y4m_header(line: bytes, offset: int) -> Y4mHeader:
    if not line.startswith(b"YUV4MPEG2"):
        raise Y4mError(f"not a Y4M stream: missing YUV4MPEG2 magic at byte {offset}")
    width = height = None
    fps = (30, 1)
    subsampling = "420"
    extras = []
    pos = offset + len(b"YUV4MPEG2")
    for tok in line.decode("ascii", "replace").split()[1:]:
        pos += 1  # separating space
        try:
            if tok[0] == "W":
                width = int(tok[1:])
            elif tok[0] == "H":
                height = int(tok[1:])
            elif tok[0] == "F":
                num, den = tok[1:].split(":")
                fps = (int(num), int(den))
            elif tok[0] == "C":
                tag = tok[1:]
                if tag in _420_TAGS:
                    subsampling = "420"
                elif tag == "444":
                    subsampling = "444"
                else:
                    raise Y4mError(
                        f"unsupported Y4M colorspace {tag!r} at byte {pos}"
                        " (only 8-bit 4:2:0 and 4:4:4 are handled)"
                    )
            else:
                extras.append(tok)
        except (ValueError, IndexError) as exc:
            if isinstance(exc, Y4mError):
                raise
            raise Y4mError(f"malformed Y4M header token {tok!r} at byte {pos}") from exc
        pos += len(tok)
    if width is None or height is None:
        raise Y4mError(f"Y4M header missing W or H (header ends at byte {pos})")
    if width <= 0 or height <= 0:
        raise Y4mError(f"non-positive Y4M dimensions {width}x{height}")
    if subsampling == "420" and (width % 2 or height % 2):
        raise Y4mError(f"4:2:0 stream requires even dimensions, got {width}x{height}")
    return Y4mHeader(width, height, fps, subsampling, " ".join(extras))


def read_y4m_raw(path):
    """Parse a Y4M file into its header and raw 8-bit YUV frames."""
    with open(path, "rb") as fh:
        data = fh.read()
    nl = data.find(b"\n")
    if nl < 0:
        raise Y4mError("truncated Y4M header: no newline found (byte 0)")
    header = _parse_y4m_header(data[:nl], 0)
    w, h = header.width, header.height
    if header.subsampling == "420":
        cw, ch = w // 2, h // 2
    else:
        cw, ch = w, h
    frame_bytes = w * h + 2 * cw * ch

    frames = []
    pos = nl + 1
    index = 0
    while pos < len(data):
        if not data.startswith(b"FRAME", pos):
            raise Y4mError(f"expected FRAME marker at byte {pos} (frame {index})")
        fnl = data.find(b"\n", pos)
        if fnl < 0:
            raise Y4mError(f"truncated FRAME header at frame {index}")
        start = fnl + 1
        end = start + frame_bytes
        if end > len(data):
            raise Y4mError(
                f"truncated frame {index}: need {frame_bytes} bytes, got {len(data) - start}"
            )
        raw = np.frombuffer(data[start:end], dtype=np.uint8)
        y = raw[: w * h].reshape(h, w)
        u = raw[w * h : w * h + cw * ch].reshape(ch, cw)
        v = raw[w * h + cw * ch :].reshape(ch, cw)
        frames.append(YuvFrame(y=y, u=u, v=v, index=index))
        pos = end
        index += 1
    return header, frames


def yuv_to_rgb(frame: YuvFrame, subsampling: str = "420", matrix: str = "bt601") -> RgbFrame:
    """Convert one full-range 8-bit YUV frame to an RgbFrame in [0, 1]."""
    if matrix not in _YUV_MATRICES:
        raise ValueError(f"unknown matrix {matrix!r}, expected one of {sorted(_YUV_MATRICES)}")
    vr, ug, vg, ub = _YUV_MATRICES[matrix]
    y = frame.y.astype(np.float64)
    u = frame.u.astype(np.float64)
    v = frame.v.astype(np.float64)
    if subsampling == "420":
        # nearest-neighbour chroma upsampling
        u = np.repeat(np.repeat(u, 2, axis=0), 2, axis=1)[: y.shape[0], : y.shape[1]]
        v = np.repeat(np.repeat(v, 2, axis=0), 2, axis=1)[: y.shape[0], : y.shape[1]]
    u -= 128.0
    v -= 128.0
    r = (y + vr * v) / 255.0
    g = (y - ug * u - vg * v) / 255.0
    b = (y + ub * u) / 255.0
    clip = lambda p: np.clip(p, 0.0, 1.0)
    return RgbFrame(r=clip(r), g=clip(g), b=clip(b), index=frame.index)


def read_y4m(path, matrix: str = "bt601"):
    """Decode a Y4M file to a list of RgbFrames in display order."""
    header, raw = read_y4m_raw(path)
    return [yuv_to_rgb(f, header.subsampling, matrix) for f in raw]


def rgb_to_yuv(frame: RgbFrame, matrix: str = "bt601", subsampling: str = "444") -> YuvFrame:
    """Forward full-range RGB -> 8-bit YUV, for writing synthetic streams."""
    if matrix not in _YUV_MATRICES:
        raise ValueError(f"unknown matrix {matrix!r}")
    vr, _, _, ub = _YUV_MATRICES[matrix]
    if matrix == "bt601":
        kr, kb = 0.299, 0.114
    else:
        kr, kb = 0.2126, 0.0722
    y = kr * frame.r + (1.0 - kr - kb) * frame.g + kb * frame.b
    u = 128.0 + 255.0 * (frame.b - y) / ub
    v = 128.0 + 255.0 * (frame.r - y) / vr
    y = 255.0 * y
    q = lambda p: np.clip(np.round(p), 0, 255).astype(np.uint8)
    if subsampling == "420":
        u = 0.25 * (u[0::2, 0::2] + u[0::2, 1::2] + u[1::2, 0::2] + u[1::2, 1::2])
        v = 0.25 * (v[0::2, 0::2] + v[0::2, 1::2] + v[1::2, 0::2] + v[1::2, 1::2])
    return YuvFrame(y=q(y), u=q(u), v=q(v), index=frame.index)


def write_y4m(path, frames, fps=(30, 1), subsampling: str = "420") -> None:
    """Write 8-bit planar YUV frames as a Y4M stream (the repo's own encoder)."""
    if not frames:
        raise ValueError("cannot write an empty Y4M stream")
    h, w = frames[0].y.shape
    tag = {"420": "420jpeg", "444": "444"}[subsampling]
    with open(path, "wb") as fh:
        fh.write(f"YUV4MPEG2 W{w} H{h} F{fps[0]}:{fps[1]} Ip A1:1 C{tag}\n".encode("ascii"))
        for f in frames:
            fh.write(b"FRAME\n")
            fh.write(np.ascontiguousarray(f.y, dtype=np.uint8).tobytes())
            fh.write(np.ascontiguousarray(f.u, dtype=np.uint8).tobytes())
            fh.write(np.ascontiguousarray(f.v, dtype=np.uint8).tobytes())


# ---------------------------------------------------------------------------
# Minimal PNG codec: 8/16-bit RGB(A) truecolor, non-interlaced.

_PNG_SIG = b"\x89PNG\r\n\x1a\n"


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def decode_png(data: bytes) -> np.ndarray:
    """Decode a truecolor PNG to an HxWx3 uint8 or uint16 array."""
    if data[:8] != _PNG_SIG:
        raise PngError("missing PNG signature")
    pos = 8
    ihdr = None
    idat = bytearray()
    while pos < len(data):
        if pos + 8 > len(data):
            raise PngError("truncated chunk header")
        length, ctype = struct.unpack(">I4s", data[pos : pos + 8])
        chunk = data[pos + 8 : pos + 8 + length]
        if len(chunk) != length:
            raise PngError(f"truncated {ctype.decode('latin1')} chunk")
        crc = struct.unpack(">I", data[pos + 8 + length : pos + 12 + length])[0]
        if zlib.crc32(ctype + chunk) & 0xFFFFFFFF != crc:
            raise PngError(f"bad CRC in {ctype.decode('latin1')} chunk")
        if ctype == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", chunk)
        elif ctype == b"IDAT":
            idat.extend(chunk)
        elif ctype == b"IEND":
            break
        pos += 12 + length
    if ihdr is None:
        raise PngError("missing IHDR chunk")
    w, h, depth, ctype_id, comp, filt, interlace = ihdr
    if comp != 0 or filt != 0:
        raise PngError("unsupported PNG compression/filter method")
    if interlace != 0:
        raise PngError("interlaced PNG not supported")
    if ctype_id not in (2, 6):
        raise PngError(f"unsupported PNG color type {ctype_id} (need RGB or RGBA)")
    if depth not in (8, 16):
        raise PngError(f"unsupported PNG bit depth {depth}")
    channels = 3 if ctype_id == 2 else 4
    sample_bytes = depth // 8
    bpp = channels * sample_bytes
    stride = w * bpp

    raw = zlib.decompress(bytes(idat))
    if len(raw) != h * (stride + 1):
        raise PngError("PNG pixel data has wrong length")

    out = bytearray(h * stride)
    prev = bytearray(stride)
    for row in range(h):
        off = row * (stride + 1)
        ftype = raw[off]
        line = bytearray(raw[off + 1 : off + 1 + stride])
        if ftype == 0:
            pass
        elif ftype == 1:  # Sub
            for i in range(bpp, stride):
                line[i] = (line[i] + line[i - bpp]) & 0xFF
        elif ftype == 2:  # Up
            for i in range(stride):
                line[i] = (line[i] + prev[i]) & 0xFF
        elif ftype == 3:  # Average
            for i in range(stride):
                a = line[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + ((a + prev[i]) >> 1)) & 0xFF
        elif ftype == 4:  # Paeth
            for i in range(stride):
                a = line[i - bpp] if i >= bpp else 0
                c = prev[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + _paeth(a, prev[i], c)) & 0xFF
        else:
            raise PngError(f"unknown PNG filter type {ftype} in row {row}")
        out[row * stride : (row + 1) * stride] = line
        prev = line

    dtype = np.dtype(">u2") if depth == 16 else np.uint8
    arr = np.frombuffer(bytes(out), dtype=dtype).reshape(h, w, channels)
    arr = arr[:, :, :3]  # drop alpha if present
    return arr.astype(np.uint16 if depth == 16 else np.uint8)


def encode_png(arr: np.ndarray) -> bytes:
    """Encode an HxWx3 uint8 or uint16 array as a truecolor PNG."""
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("expected an HxWx3 array")
    if arr.dtype == np.uint8:
        depth, payload = 8, arr
    elif arr.dtype == np.uint16:
        depth, payload = 16, arr.astype(">u2")
    else:
        raise ValueError(f"unsupported dtype {arr.dtype}, expected uint8 or uint16")
    h, w = arr.shape[:2]
    stride = w * 3 * (depth // 8)
    flat = payload.tobytes()
    raw = bytearray()
    for row in range(h):
        raw.append(0)  # filter: None
        raw.extend(flat[row * stride : (row + 1) * stride])

    def chunk(ctype: bytes, body: bytes) -> bytes:
        return (
            struct.pack(">I", len(body))
            + ctype
            + body
            + struct.pack(">I", zlib.crc32(ctype + body) & 0xFFFFFFFF)
        )

    ihdr = struct.pack(">IIBBBBB", w, h, depth, 2, 0, 0, 0)
    return (
        _PNG_SIG
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(bytes(raw), 6))
        + chunk(b"IEND", b"")
    )


def read_png_dir(directory):
    """Decode every PNG in a directory, ordered by filename, to RgbFrames."""
    names = sorted(n for n in os.listdir(directory) if n.lower().endswith(".png"))
    if not names:
        raise PngError(f"no PNG files found in {directory}")
    frames = []
    dims = None
    for idx, name in enumerate(names):
        with open(os.path.join(directory, name), "rb") as fh:
            try:
                arr = decode_png(fh.read())
            except PngError as exc:
                raise PngError(f"{name}: {exc}") from exc
        if dims is None:
            dims = arr.shape[:2]
        elif arr.shape[:2] != dims:
            raise PngError(
                f"dimension mismatch: {name} is {arr.shape[1]}x{arr.shape[0]},"
                f" expected {dims[1]}x{dims[0]}"
            )
        scale = 65535.0 if arr.dtype == np.uint16 else 255.0
        planes = arr.astype(np.float64) / scale
        frames.append(RgbFrame(r=planes[:, :, 0], g=planes[:, :, 1], b=planes[:, :, 2], index=idx))
    return frames


def read_video(path, matrix: str = "bt601"):
    """Dispatch on input kind: a .y4m file or a directory of PNG frames."""
    if os.path.isdir(path):
        return read_png_dir(path)
    return read_y4m(path, matrix=matrix)


# ---------------------------------------------------------------------------
# Dataset manifest

@dataclass
class ManifestRow:
    video_id: str
    path: str
    mos: float


@dataclass
class DatasetManifest:
    rows: list[ManifestRow] = field(default_factory=list)

    def ids(self) -> list[str]:
        return [r.video_id for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


def read_manifest(path) -> DatasetManifest:
    """Parse a video_id,path,mos CSV; duplicate ids and bad MOS values are rejected."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError("empty manifest") from None
        if [c.strip() for c in header] != ["video_id", "path", "mos"]:
            raise ManifestError(f"bad manifest header {header!r}, expected video_id,path,mos")
        rows = []
        seen = set()
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 3:
                raise ManifestError(f"row {lineno}: expected 3 columns, got {len(rec)}")
            vid, vpath, mos_s = rec
            if vid in seen:
                raise ManifestError(f"row {lineno}: duplicate video_id {vid!r}")
            seen.add(vid)
            try:
                mos = float(mos_s)
            except ValueError:
                raise ManifestError(f"row {lineno}: non-numeric mos {mos_s!r}") from None
            if not np.isfinite(mos):
                raise ManifestError(f"row {lineno}: non-finite mos {mos_s!r}")
            rows.append(ManifestRow(video_id=vid, path=vpath, mos=mos))
    return DatasetManifest(rows=rows)


def write_manifest(path, manifest: DatasetManifest) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("video_id,path,mos\n")
        for r in manifest.rows:
            fh.write(f"{r.video_id},{r.path},{float(r.mos)!r}\n")
