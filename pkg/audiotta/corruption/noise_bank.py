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
import logging
import posixpath
from typing import Dict

import numpy as np
import torch
import torchaudio
from scipy import signal

from audiotta.core.errors import MissingDataset
from audiotta.corruption.spec import NoiseSource
from audiotta.io.audio import Waveform, read_wav

LOG = logging.getLogger("audiotta")

NoiseBank = Dict[NoiseSource, Waveform]

# File names inside the SpeechCommands `_background_noise_` folder
BACKGROUND_NOISE_FILES = {
    NoiseSource.DD: "doing_the_dishes.wav",
    NoiseSource.EB: "exercise_bike.wav",
    NoiseSource.RT: "running_tap.wav",
}


def resample(waveform: Waveform, sample_rate: int) -> Waveform:
    """Windowed-sinc resampling to ``sample_rate``"""
    if waveform.sample_rate == sample_rate:
        return waveform
    resampled = torchaudio.functional.resample(
        torch.from_numpy(waveform.samples), waveform.sample_rate, sample_rate
    )
    return Waveform(resampled.numpy(), sample_rate)


def load_noise_bank(root: str, storage_options=None) -> NoiseBank:
    """Read the dishes, exercise-bike and running-tap recordings

    Parameters
    ----------
    root : str
        Either the SpeechCommands root or its ``_background_noise_`` folder

    Raises
    ------
    MissingDataset
        If one of the recordings cannot be found
    """
    folder = root.rstrip("/")
    if posixpath.basename(folder) != "_background_noise_":
        folder = posixpath.join(folder, "_background_noise_")

    bank = {}
    for source, file_name in BACKGROUND_NOISE_FILES.items():
        path = posixpath.join(folder, file_name)
        try:
            bank[source] = read_wav(path, storage_options=storage_options)
        except FileNotFoundError as err:
            raise MissingDataset(f"Background noise recording {path} not found") from err
    return bank


def _normalize_peak(samples: np.ndarray, peak: float = 0.5) -> np.ndarray:
    return samples * (peak / np.max(np.abs(samples)))


def _clatter(rng: np.random.Generator, sample_rate: int, num_samples: int) -> np.ndarray:
    # sparse decaying resonances, like cutlery hitting plates
    out = 0.01 * rng.standard_normal(num_samples)
    num_hits = int(6 * num_samples / sample_rate)
    for start in rng.integers(0, num_samples, size=num_hits):
        freq = rng.uniform(1500.0, min(5000.0, 0.45 * sample_rate))
        tau = rng.uniform(0.01, 0.05)
        length = min(int(5 * tau * sample_rate), num_samples - start)
        t = np.arange(length) / sample_rate
        out[start : start + length] += (
            rng.uniform(0.2, 1.0) * np.exp(-t / tau) * np.sin(2 * np.pi * freq * t)
        )
    return out


def _hum(rng: np.random.Generator, sample_rate: int, num_samples: int) -> np.ndarray:
    # harmonic drone with a pedalling-rate amplitude modulation
    t = np.arange(num_samples) / sample_rate
    f0 = rng.uniform(100.0, 120.0)
    drone = sum(
        np.sin(2 * np.pi * h * f0 * t + rng.uniform(0, 2 * np.pi)) / h
        for h in range(1, 7)
        if h * f0 < sample_rate / 2
    )
    modulation = 1.0 + 0.5 * np.sin(2 * np.pi * rng.uniform(0.8, 1.5) * t)
    rumble = signal.lfilter([1.0], [1.0, -0.99], 0.01 * rng.standard_normal(num_samples))
    return drone * modulation + rumble


def _hiss(rng: np.random.Generator, sample_rate: int, num_samples: int) -> np.ndarray:
    # band-limited broadband noise
    high = min(6000.0, 0.45 * sample_rate)
    sos = signal.butter(4, [500.0, high], btype="bandpass", fs=sample_rate, output="sos")
    return signal.sosfilt(sos, rng.standard_normal(num_samples))


def make_toy_noise_bank(
    sample_rate: int = 16000, duration_s: float = 30.0, seed: int = 0
) -> NoiseBank:
    """Synthetic stand-ins for the three background noise recordings.

    DD is impulsive, EB is tonal with a slow modulation and RT is
    broadband, which is enough to exercise the full corruption protocol
    without any download.
    """
    num_samples = int(round(duration_s * sample_rate))
    rng = np.random.default_rng(seed)
    makers = {NoiseSource.DD: _clatter, NoiseSource.EB: _hum, NoiseSource.RT: _hiss}
    return {
        source: Waveform(_normalize_peak(make(rng, sample_rate, num_samples)), sample_rate)
        for source, make in makers.items()
    }
