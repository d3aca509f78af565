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

import numpy as np
import pytest

from audiotta.core.errors import (
    ClipTooLong,
    LambdaOutOfRange,
    LengthMismatch,
    UnknownNoiseSource,
    ZeroEnergyNoise,
    ZeroEnergySignal,
)
from audiotta.corruption import (
    CorruptionSpec,
    NoiseSource,
    corrupt_set,
    corrupt_set_with_details,
    gaussian_shift,
    make_toy_noise_bank,
    mix_noise,
    noise_scale,
    random_clip,
)
from audiotta.io.audio import Waveform


def _snr(clean, mixed):
    residual = mixed.samples - clean.samples
    return 10 * np.log10(clean.energy / np.dot(residual, residual))


def test_mix_noise_hits_target_snr():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        clean = Waveform(rng.uniform(0.01, 1.0) * rng.standard_normal(256), 16000)
        noise = Waveform(rng.uniform(0.01, 10.0) * rng.standard_normal(256), 16000)
        snr = float(rng.choice([3.0, 10.0]))
        assert abs(_snr(clean, mix_noise(clean, noise, snr)) - snr) < 1e-6


def test_mix_noise_at_infinite_snr_is_identity(tone, rng):
    noise = Waveform(rng.standard_normal(len(tone)), tone.sample_rate)
    assert noise_scale(tone, noise, np.inf) == 0.0
    assert mix_noise(tone, noise, np.inf) == tone


def test_noise_scale_errors(tone):
    with pytest.raises(LengthMismatch):
        noise_scale(tone, Waveform(np.ones(10), tone.sample_rate), 3)
    with pytest.raises(LengthMismatch):
        noise_scale(tone, Waveform(np.ones(len(tone)), 8000), 3)
    with pytest.raises(ZeroEnergyNoise):
        noise_scale(tone, Waveform(np.zeros(len(tone)), tone.sample_rate), 3)
    with pytest.raises(ZeroEnergySignal):
        noise_scale(Waveform(np.zeros(len(tone)), tone.sample_rate), tone, 3)


def test_random_clip_is_seeded_and_in_bounds():
    long_noise = Waveform(np.arange(16000 * 3), 16000)
    clip = random_clip(long_noise, 1.0, np.random.default_rng(3))
    assert len(clip) == 16000
    start = int(clip.samples[0])
    np.testing.assert_array_equal(clip.samples, np.arange(start, start + 16000))
    assert clip == random_clip(long_noise, 1.0, np.random.default_rng(3))


def test_random_clip_too_long():
    with pytest.raises(ClipTooLong):
        random_clip(Waveform(np.ones(100), 100), 2.0, np.random.default_rng(0))


def test_gaussian_shift(tone):
    assert gaussian_shift(tone, 0.0, np.random.default_rng(0)) == tone
    shifted = gaussian_shift(tone, 0.005, np.random.default_rng(0))
    assert np.std(shifted.samples - tone.samples) == pytest.approx(0.005, rel=0.05)
    with pytest.raises(LambdaOutOfRange):
        gaussian_shift(tone, 1.5, np.random.default_rng(0))


@pytest.mark.parametrize("source", ["dd", "eb", "rt"])
def test_corrupt_set_background(toy_dataset, noise_bank, source):
    clean = toy_dataset.waveforms["test"][:10]
    spec = CorruptionSpec(source, snr_db=3.0, seed=7)
    corrupted, details = corrupt_set_with_details(clean, spec, noise_bank)

    assert len(corrupted) == len(clean)
    assert list(details.columns) == ["noise_offset", "noise_scale", "realized_snr"]
    np.testing.assert_allclose(details["realized_snr"], 3.0, atol=1e-6)
    for x, y in zip(clean, corrupted):
        assert len(x) == len(y)
        assert abs(_snr(x, y) - 3.0) < 1e-6

    again = corrupt_set(clean, spec, noise_bank)
    assert all(a == b for a, b in zip(corrupted, again))


def test_corrupt_set_seed_changes_noise(toy_dataset, noise_bank):
    clean = toy_dataset.waveforms["test"][:5]
    first = corrupt_set(clean, CorruptionSpec("eb", snr_db=10.0, seed=0), noise_bank)
    second = corrupt_set(clean, CorruptionSpec("eb", snr_db=10.0, seed=1), noise_bank)
    assert any(a != b for a, b in zip(first, second))


def test_corrupt_set_gaussian(toy_dataset):
    clean = toy_dataset.waveforms["test"][:5]
    corrupted, details = corrupt_set_with_details(clean, CorruptionSpec("gauss", lam=0.01))
    assert details["realized_snr"].isna().all()
    assert all(a != b for a, b in zip(clean, corrupted))


def test_corrupt_set_missing_source(toy_dataset, noise_bank):
    bank = {NoiseSource.DD: noise_bank[NoiseSource.DD]}
    with pytest.raises(UnknownNoiseSource):
        corrupt_set(toy_dataset.waveforms["test"][:1], CorruptionSpec("rt", snr_db=3), bank)


def test_noise_at_another_rate_is_resampled_with_a_warning(tone, caplog):
    bank = make_toy_noise_bank(sample_rate=8000, duration_s=3.0, seed=0)
    with caplog.at_level(logging.WARNING, logger="audiotta"):
        corrupted, details = corrupt_set_with_details(
            [tone, tone], CorruptionSpec("rt", snr_db=10.0), bank
        )
    warnings = [r for r in caplog.records if r.levelno == logging.WARNING]
    assert len(warnings) == 1
    assert "from 8000 Hz to 16000 Hz" in warnings[0].getMessage()
    assert corrupted[0].sample_rate == 16000
    np.testing.assert_allclose(details["realized_snr"], 10.0, atol=1e-6)
