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
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import torch
import torchaudio
from torch import nn

from audiotta.core.errors import TooShort
from audiotta.features.config import FeatureConfig
from audiotta.io.audio import Waveform


@dataclass(frozen=True, eq=False)
class SpectrogramImage:
    """Log-power mel spectrogram, shaped (mel_bins, frames)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 2:
            raise ValueError(f"Spectrogram must be 2-D (mel_bins, frames), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("Spectrogram values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def mel_bins(self) -> int:
        return self.values.shape[0]

    @property
    def frames(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def to_tensor(self) -> torch.Tensor:
        """Single-channel image tensor of shape (1, mel_bins, frames)"""
        return torch.from_numpy(self.values.copy()).unsqueeze(0)


class SpectrogramFrontend(nn.Module):
    """Waveform batch (N, samples) to log-mel images (N, 1, mel_bins, frames)"""

    def __init__(self, config: FeatureConfig):
        super().__init__()
        self.config = config
        self.mel = torchaudio.transforms.MelSpectrogram(
            sample_rate=config.sample_rate,
            n_fft=config.n_fft,
            hop_length=config.hop,
            f_min=config.fmin,
            f_max=config.fmax,
            n_mels=config.mel_bins,
            center=config.center,
            power=2.0,
        )

    def forward(self, waveforms: torch.Tensor) -> torch.Tensor:
        if waveforms.shape[-1] < self.config.n_fft:
            raise TooShort(
                f"Input of {waveforms.shape[-1]} samples is shorter than n_fft={self.config.n_fft}"
            )
        power = self.mel(waveforms.to(torch.float32))
        return torch.log(power + self.config.log_floor).unsqueeze(1)


def _check_rate(x: Waveform, config: FeatureConfig):
    if x.sample_rate != config.sample_rate:
        raise ValueError(
            f"Waveform at {x.sample_rate} Hz does not match the feature config "
            f"({config.sample_rate} Hz)"
        )


def mel_spectrogram(x: Waveform, config: FeatureConfig = None) -> SpectrogramImage:
    """Log-mel spectrogram of one waveform

    Parameters
    ----------
    x : Waveform
        Input audio, at ``config.sample_rate``
    config : FeatureConfig
        Front-end settings, defaults to ``FeatureConfig()``

    Returns
    -------
    SpectrogramImage
        ``log(mel(|STFT|^2) + log_floor)`` with ``config.num_frames(len(x))`` frames

    Raises
    ------
    TooShort
        If the waveform is shorter than ``n_fft``
    """
    config = config or FeatureConfig()
    _check_rate(x, config)
    if len(x) < config.n_fft:
        raise TooShort(f"Input of {len(x)} samples is shorter than n_fft={config.n_fft}")
    frontend = SpectrogramFrontend(config)
    with torch.no_grad():
        image = frontend(torch.from_numpy(x.samples).unsqueeze(0))
    return SpectrogramImage(image[0, 0].numpy())


def extract_batch(
    waveforms: Sequence[Waveform], config: FeatureConfig = None, batch_size: int = 256
) -> torch.Tensor:
    """Log-mel images for equally long waveforms, stacked as (N, 1, mel_bins, frames)"""
    config = config or FeatureConfig()
    frontend = SpectrogramFrontend(config)
    images: List[torch.Tensor] = []
    with torch.no_grad():
        for start in range(0, len(waveforms), batch_size):
            chunk = waveforms[start : start + batch_size]
            for x in chunk:
                _check_rate(x, config)
            stacked = torch.from_numpy(np.stack([x.samples for x in chunk]))
            images.append(frontend(stacked))
    if not images:
        n_frames = config.num_frames(config.sample_rate)
        return torch.empty((0, 1, config.mel_bins, n_frames))
    return torch.cat(images)


def stack_images(images: Sequence[SpectrogramImage]) -> torch.Tensor:
    return torch.stack([image.to_tensor() for image in images])
