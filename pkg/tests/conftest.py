import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from gvqp.frameio import RgbFrame, YuvFrame, write_y4m


def rgb_from_array(arr: np.ndarray, index: int = 0) -> RgbFrame:
    return RgbFrame(r=arr[:, :, 0], g=arr[:, :, 1], b=arr[:, :, 2], index=index)


def gray_frame(value: float, h: int = 16, w: int = 16, index: int = 0) -> RgbFrame:
    p = np.full((h, w), value, dtype=np.float64)
    return RgbFrame(r=p, g=p.copy(), b=p.copy(), index=index)


def write_gray_y4m(path, n_frames: int = 2, h: int = 4, w: int = 4, value: int = 128):
    frames = [
        YuvFrame(
            y=np.full((h, w), value, dtype=np.uint8),
            u=np.full((h // 2, w // 2), 128, dtype=np.uint8),
            v=np.full((h // 2, w // 2), 128, dtype=np.uint8),
            index=i,
        )
        for i in range(n_frames)
    ]
    write_y4m(path, frames, subsampling="420")
    return path


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(0))
