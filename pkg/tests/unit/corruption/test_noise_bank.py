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
import numpy as np
import pytest

from audiotta.core.errors import MissingDataset
from audiotta.corruption import NoiseSource, load_noise_bank, make_toy_noise_bank, resample
from audiotta.corruption.noise_bank import BACKGROUND_NOISE_FILES
from audiotta.io.audio import Waveform, write_wav


def test_toy_noise_bank(noise_bank):
    assert set(noise_bank) == {NoiseSource.DD, NoiseSource.EB, NoiseSource.RT}
    for waveform in noise_bank.values():
        assert waveform.sample_rate == 16000
        assert len(waveform) == 5 * 16000
        assert np.max(np.abs(waveform.samples)) == pytest.approx(0.5)


def test_toy_noise_bank_is_seeded():
    first = make_toy_noise_bank(duration_s=1.0, seed=3)
    second = make_toy_noise_bank(duration_s=1.0, seed=3)
    assert all(first[source] == second[source] for source in first)


def test_load_noise_bank(tmpdir):
    folder = tmpdir.mkdir("_background_noise_")
    for file_name in BACKGROUND_NOISE_FILES.values():
        write_wav(str(folder.join(file_name)), Waveform(0.1 * np.ones(1600), 16000))

    for root in (str(tmpdir), str(folder)):
        bank = load_noise_bank(root)
        assert set(bank) == set(BACKGROUND_NOISE_FILES)


def test_load_noise_bank_missing(tmpdir):
    with pytest.raises(MissingDataset, match="not found"):
        load_noise_bank(str(tmpdir))


def test_resample_changes_length():
    waveform = Waveform(np.sin(np.arange(48000) / 10), 48000)
    assert len(resample(waveform, 16000)) == 16000
    assert resample(waveform, 48000) is waveform
