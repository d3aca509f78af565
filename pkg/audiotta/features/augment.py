#
# Copyright (c) 2023, NVIDIA CORPORATION.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
from enum import IntEnum
from typing import Tuple

import numpy as np
import torch

from audiotta.features.config import FeatureConfig
from audiotta.features.spectrogram import SpectrogramImage
from audiotta.io.audio import Waveform


class ShiftClass(IntEnum):
    """Classes of the time-shift pretext task"""

    NO_SHIFT = 0
    LEFT_SHIFT = 1
    RIGHT_SHIFT = 2

    def offset(self, length: int, fraction: float) -> int:
        """Signed roll applied to an axis of ``length`` entries"""
        if not 0 < fraction < 1:
            raise ValueError(f"Shift fraction must be in (0, 1), got {fraction}")
        steps = int(round(fraction * length))
        return {ShiftClass.NO_SHIFT: 0, ShiftClass.LEFT_SHIFT: -steps}.get(self, steps)


def time_shift(x: Waveform, cls: ShiftClass, fraction: float = 0.2) -> Waveform:
    """Circularly rotate the samples left or right by ``round(fraction * len)``"""
    return x.with_samples(np.roll(x.samples, ShiftClass(cls).offset(len(x), fraction)))


def make_pretext_batch(
    batch: torch.Tensor, fraction: float = 0.2
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Triple a spectrogram batch with one copy per shift class

    Parameters
    ----------
    batch : torch.Tensor
        Images shaped (B, 1, mel_bins, frames), rolled along the frame axis
    fraction : float
        Share of the frames a shifted copy is rolled by

    Returns
    -------
    Tuple[torch.Tensor, torch.Tensor]
        Images (3B, 1, mel_bins, frames) and shift labels (3B,) ordered
        as B x NO_SHIFT, B x LEFT_SHIFT, B x RIGHT_SHIFT
    """
    frames = batch.shape[-1]
    copies, labels = [], []
    for cls in ShiftClass:
        copies.append(torch.roll(batch, shifts=cls.offset(frames, fraction), dims=-1))
        labels.append(torch.full((batch.shape[0],), int(cls), dtype=torch.long))
    return torch.cat(copies), torch.cat(labels)


def _roll_frames(values: np.ndarray, rng: np.random.Generator, max_fraction: float):
    max_shift = int(np.floor(max_fraction * values.shape[-1]))
    shift = int(rng.integers(-max_shift, max_shift + 1)) if max_shift > 0 else 0
    return np.roll(values, shift, axis=-1)


def weak_augment(
    s: SpectrogramImage, rng: np.random.Generator, config: FeatureConfig = None
) -> SpectrogramImage:
    """Small random circular time shift of at most ``weak_max_shift`` of the frames"""
    config = config or FeatureConfig()
    return SpectrogramImage(_roll_frames(s.values, rng, config.weak_max_shift))


def _mask_bands(values: np.ndarray, axis: int, rng: np.random.Generator, config: FeatureConfig):
    size = values.shape[axis]
    max_width = max(1, int(np.floor(config.strong_max_band * size)))
    num_bands = int(rng.integers(config.strong_min_bands, config.strong_max_bands + 1))
    for _ in range(num_bands):
        width = int(rng.integers(1, max_width + 1))
        start = int(rng.integers(0, size - width + 1))
        index = [slice(None)] * values.ndim
        index[axis] = slice(start, start + width)
        values[tuple(index)] = 0.0


def strong_augment(
    s: SpectrogramImage, rng: np.random.Generator, config: FeatureConfig = None
) -> SpectrogramImage:
    """Weak shift followed by time and frequency band masking.

    The spectrogram is mean-centered before masking, so masked bands end
    up at the spectrogram mean once the mean is added back.
    """
    config = config or FeatureConfig()
    values = _roll_frames(s.values, rng, config.weak_max_shift)
    mean = values.mean()
    centered = values - mean
    _mask_bands(centered, 1, rng, config)
    _mask_bands(centered, 0, rng, config)
    return SpectrogramImage(centered + mean)


def augment_batch(
    batch: torch.Tensor, rng: np.random.Generator, strong: bool, config: FeatureConfig = None
) -> torch.Tensor:
    """Apply the weak (or strong) augmentation to every image of a (B, 1, M, T) batch"""
    augment = strong_augment if strong else weak_augment
    images = batch.detach().cpu().numpy()
    out = np.stack(
        [augment(SpectrogramImage(image[0]), rng, config).values[None] for image in images]
    )
    return torch.from_numpy(out).to(batch.dtype)
