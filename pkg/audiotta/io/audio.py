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

import fsspec
import numpy as np
import soundfile as sf

from audiotta.io.fs import get_fs

WAV_SUBTYPES = {"pcm16": "PCM_16", "float32": "FLOAT"}


@dataclass(frozen=True, eq=False)
class Waveform:
    """Mono audio samples with their sampling rate.

    Samples are held as float64 so that energy ratios (and therefore SNRs)
    are exact up to double-precision rounding.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"Waveform must be mono (1-D), got an array of shape {samples.shape}")
        if samples.size == 0:
            raise ValueError("Waveform must contain at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("Waveform samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def energy(self) -> float:
        """Squared L2 norm of the samples"""
        return float(np.dot(self.samples, self.samples))

    def with_samples(self, samples) -> "Waveform":
        return Waveform(samples, self.sample_rate)

    def fit_length(self, num_samples: int) -> "Waveform":
        """Zero-pad or trim to exactly ``num_samples`` samples"""
        if len(self) >= num_samples:
            return self.with_samples(self.samples[:num_samples])
        return self.with_samples(np.pad(self.samples, (0, num_samples - len(self))))

    def __eq__(self, other):
        return (
            isinstance(other, Waveform)
            and self.sample_rate == other.sample_rate
            and np.array_equal(self.samples, other.samples)
        )


def read_wav(path, storage_options=None) -> Waveform:
    """Read a mono WAV file (integer PCM or float) as a Waveform"""
    with fsspec.open(path, "rb", **(storage_options or {})) as f:
        samples, sample_rate = sf.read(f, dtype="float64", always_2d=True)
    if samples.shape[1] != 1:
        raise ValueError(f"{path} has {samples.shape[1]} channels, only mono audio is supported")
    return Waveform(samples[:, 0], sample_rate)


def write_wav(path, waveform: Waveform, encoding: str = "float32", storage_options=None):
    """Write a Waveform as WAV

    Parameters
    ----------
    path : str
        Destination, local path or fsspec url
    waveform : Waveform
        Audio to write
    encoding : {"pcm16", "float32"}
        Sample encoding. PCM16 clips samples to [-1, 1).
    """
    if encoding not in WAV_SUBTYPES:
        raise ValueError(f"encoding must be one of {list(WAV_SUBTYPES)}, got {encoding}")
    fs = get_fs(path, storage_options, for_write=True)
    samples = waveform.samples
    dtype = "float32"
    if encoding == "pcm16":
        samples = np.clip(samples, -1.0, 1.0 - 1.0 / 32768)
        dtype = "int16"
        samples = np.round(samples * 32768).astype(dtype)
    with fs.open(path, "wb") as f:
        sf.write(
            f,
            samples.astype(dtype),
            waveform.sample_rate,
            subtype=WAV_SUBTYPES[encoding],
            format="WAV",
        )
