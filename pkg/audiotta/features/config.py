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
from typing import Optional


@dataclass(frozen=True)
class FeatureConfig:
    """Mel-spectrogram front end and augmentation settings.

    Defaults are the usual keyword-spotting settings at 16 kHz: 25 ms
    windows, 10 ms hop and 64 mel bins with centered padding.
    """

    sample_rate: int = 16000
    n_fft: int = 400
    hop: int = 160
    mel_bins: int = 64
    fmin: float = 0.0
    fmax: Optional[float] = None
    log_floor: float = 1e-6
    center: bool = True

    # time-shift pretext task
    shift_fraction: float = 0.2

    # weak/strong augmentation pair
    weak_max_shift: float = 0.05
    strong_max_band: float = 0.07
    strong_min_bands: int = 1
    strong_max_bands: int = 2

    def __post_init__(self):
        if self.fmax is None:
            object.__setattr__(self, "fmax", self.sample_rate / 2)
        if not 0 < self.hop <= self.n_fft:
            raise ValueError(f"hop must be in (0, n_fft={self.n_fft}], got {self.hop}")
        if not 0 <= self.fmin < self.fmax <= self.sample_rate / 2:
            raise ValueError(
                f"Expected 0 <= fmin < fmax <= sample_rate / 2, "
                f"got fmin={self.fmin} fmax={self.fmax} sample_rate={self.sample_rate}"
            )
        if self.mel_bins <= 0 or self.log_floor <= 0:
            raise ValueError("mel_bins and log_floor must be positive")
        if not 0 < self.shift_fraction < 1:
            raise ValueError(f"shift_fraction must be in (0, 1), got {self.shift_fraction}")
        if not 0 <= self.weak_max_shift < 1 or not 0 < self.strong_max_band < 1:
            raise ValueError("Augmentation fractions must be in [0, 1)")
        if not 0 <= self.strong_min_bands <= self.strong_max_bands:
            raise ValueError("strong_min_bands must be <= strong_max_bands")

    def num_frames(self, num_samples: int) -> int:
        """Frames produced for an input of ``num_samples`` samples"""
        if self.center:
            return 1 + num_samples // self.hop
        return 1 + (num_samples - self.n_fft) // self.hop

    def for_sample_rate(self, sample_rate: int) -> "FeatureConfig":
        """Same settings at another sampling rate, with fmax clamped to Nyquist"""
        fields = {**self.__dict__, "sample_rate": sample_rate}
        fields["fmax"] = min(self.fmax, sample_rate / 2)
        return FeatureConfig(**fields)
