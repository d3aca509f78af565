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
from typing import Dict, List, Mapping, Tuple

import numpy as np
import pandas as pd

from audiotta.core.errors import (
    ClipTooLong,
    LambdaOutOfRange,
    LengthMismatch,
    UnknownNoiseSource,
    ZeroEnergyNoise,
    ZeroEnergySignal,
)
from audiotta.corruption.noise_bank import resample
from audiotta.corruption.spec import CorruptionSpec, NoiseSource
from audiotta.io.audio import Waveform

LOG = logging.getLogger("audiotta")


def noise_scale(clean: Waveform, noise: Waveform, snr_db: float) -> float:
    """Factor that brings ``noise`` to ``snr_db`` relative to ``clean``

    Parameters
    ----------
    clean : Waveform
        Signal the noise is mixed into
    noise : Waveform
        Noise clip of the same length and sample rate
    snr_db : float
        Target signal-to-noise ratio in dB. ``inf`` gives a scale of 0.

    Returns
    -------
    float
        ``sqrt(|x|^2 / |n|^2 * 10^(-snr_db / 10))``

    Raises
    ------
    LengthMismatch
        If lengths or sample rates differ
    ZeroEnergyNoise, ZeroEnergySignal
        If either waveform is silent
    """
    if len(clean) != len(noise) or clean.sample_rate != noise.sample_rate:
        raise LengthMismatch(
            f"Clean ({len(clean)} samples @ {clean.sample_rate} Hz) and noise "
            f"({len(noise)} samples @ {noise.sample_rate} Hz) must match"
        )
    noise_energy = noise.energy
    if noise_energy <= 0.0:
        raise ZeroEnergyNoise("Noise clip has zero energy")
    clean_energy = clean.energy
    if clean_energy <= 0.0:
        raise ZeroEnergySignal("Clean signal has zero energy, the SNR is undefined")
    return float(np.sqrt(clean_energy / noise_energy * 10.0 ** (-float(snr_db) / 10.0)))


def mix_noise(clean: Waveform, noise: Waveform, snr_db: float) -> Waveform:
    """Add ``noise`` to ``clean`` so that the mixture has the requested SNR

    No clipping is applied, so the output may leave [-1, 1].
    """
    scale = noise_scale(clean, noise, snr_db)
    return clean.with_samples(clean.samples + scale * noise.samples)


def realized_snr(clean: Waveform, scaled_noise: np.ndarray) -> float:
    """SNR in dB of ``clean`` against an already scaled noise array"""
    scaled_noise = np.asarray(scaled_noise, dtype=np.float64)
    return float(10.0 * np.log10(clean.energy / np.dot(scaled_noise, scaled_noise)))


def random_clip_with_offset(
    long_noise: Waveform, num_samples: int, rng: np.random.Generator
) -> Tuple[Waveform, int]:
    if num_samples <= 0:
        raise ValueError(f"Clip length must be positive, got {num_samples} samples")
    if num_samples > len(long_noise):
        raise ClipTooLong(
            f"Cannot cut {num_samples} samples from a recording of {len(long_noise)} samples"
        )
    offset = int(rng.integers(0, len(long_noise) - num_samples + 1))
    return long_noise.with_samples(long_noise.samples[offset : offset + num_samples]), offset


def random_clip(long_noise: Waveform, duration_s: float, rng: np.random.Generator) -> Waveform:
    """Contiguous clip of ``duration_s`` seconds at a uniformly drawn offset"""
    num_samples = int(round(duration_s * long_noise.sample_rate))
    clip, _ = random_clip_with_offset(long_noise, num_samples, rng)
    return clip


def gaussian_shift(x: Waveform, lam: float, rng: np.random.Generator) -> Waveform:
    """Add ``lam`` times standard-normal noise drawn from ``rng``"""
    if not 0.0 <= lam <= 1.0:
        raise LambdaOutOfRange(f"lam must be in [0, 1], got {lam}")
    return x.with_samples(x.samples + lam * rng.standard_normal(len(x)))


def corrupt_set_with_details(
    test_set: List[Waveform],
    spec: CorruptionSpec,
    noise_bank: Mapping[NoiseSource, Waveform] = None,
) -> Tuple[List[Waveform], pd.DataFrame]:
    """Corrupt every sample of ``test_set`` and report how each one was corrupted

    A single generator seeded with ``spec.seed`` is consumed in sample
    order, so a given spec always yields the same corpus. Every sample
    gets its own random noise clip, as long as the sample itself.

    Returns
    -------
    Tuple[List[Waveform], pd.DataFrame]
        Corrupted samples and one row per sample with the noise offset,
        noise scale and realized SNR (NaN for the Gaussian shift)
    """
    rng = np.random.default_rng(spec.seed)
    source = spec.noise_source
    details = {"noise_offset": [], "noise_scale": [], "realized_snr": []}
    corrupted = []

    if not source.is_background:
        for sample in test_set:
            corrupted.append(gaussian_shift(sample, spec.lam, rng))
            details["noise_offset"].append(-1)
            details["noise_scale"].append(spec.lam)
            details["realized_snr"].append(np.nan)
        return corrupted, pd.DataFrame(details)

    if noise_bank is None or source not in noise_bank:
        raise UnknownNoiseSource(f"Noise source {source.value!r} is not in the noise bank")

    long_noise = noise_bank[source]
    resampled: Dict[int, Waveform] = {}
    for sample in test_set:
        noise = long_noise
        if noise.sample_rate != sample.sample_rate:
            if sample.sample_rate not in resampled:
                LOG.warning(
                    "Resampling %s noise from %d Hz to %d Hz",
                    source.value,
                    noise.sample_rate,
                    sample.sample_rate,
                )
                resampled[sample.sample_rate] = resample(noise, sample.sample_rate)
            noise = resampled[sample.sample_rate]
        clip, offset = random_clip_with_offset(noise, len(sample), rng)
        scale = noise_scale(sample, clip, spec.snr_db)
        scaled = scale * clip.samples
        corrupted.append(sample.with_samples(sample.samples + scaled))
        details["noise_offset"].append(offset)
        details["noise_scale"].append(scale)
        details["realized_snr"].append(realized_snr(sample, scaled))

    return corrupted, pd.DataFrame(details)


def corrupt_set(
    test_set: List[Waveform],
    spec: CorruptionSpec,
    noise_bank: Mapping[NoiseSource, Waveform] = None,
) -> List[Waveform]:
    """Corrupt a test set with background noise at a fixed SNR or a Gaussian shift"""
    corrupted, _ = corrupt_set_with_details(test_set, spec, noise_bank)
    return corrupted
