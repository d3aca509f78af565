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
import torch

from audiotta.features.augment import (
    ShiftClass,
    augment_batch,
    make_pretext_batch,
    strong_augment,
    time_shift,
    weak_augment,
)
from audiotta.features.spectrogram import SpectrogramImage
from audiotta.io.audio import Waveform


@pytest.fixture
def image():
    rng = np.random.default_rng(0)
    return SpectrogramImage(rng.standard_normal((64, 101)))


def test_shift_offsets():
    assert ShiftClass.NO_SHIFT.offset(101, 0.2) == 0
    assert ShiftClass.LEFT_SHIFT.offset(101, 0.2) == -20
    assert ShiftClass.RIGHT_SHIFT.offset(101, 0.2) == 20
    with pytest.raises(ValueError):
        ShiftClass.LEFT_SHIFT.offset(101, 0.0)


def test_time_shift_rolls_waveforms():
    x = Waveform(np.arange(10), 10)
    left = time_shift(x, ShiftClass.LEFT_SHIFT)
    right = time_shift(x, ShiftClass.RIGHT_SHIFT)
    np.testing.assert_array_equal(left.samples, np.roll(x.samples, -2))
    np.testing.assert_array_equal(right.samples, np.roll(x.samples, 2))
    assert time_shift(x, ShiftClass.NO_SHIFT) == x


def test_shifted_copies_differ_and_invert(tone):
    left = time_shift(tone, ShiftClass.LEFT_SHIFT)
    right = time_shift(tone, ShiftClass.RIGHT_SHIFT)
    assert left != right != tone
    assert time_shift(left, ShiftClass.RIGHT_SHIFT) == tone


def test_make_pretext_batch(spectrogram_batch):
    images, labels = make_pretext_batch(spectrogram_batch)
    batch = len(spectrogram_batch)
    assert images.shape == (3 * batch, 1, 64, 101)
    assert labels.tolist() == [0] * batch + [1] * batch + [2] * batch
    torch.testing.assert_close(images[:batch], spectrogram_batch)
    torch.testing.assert_close(images[batch : 2 * batch], torch.roll(spectrogram_batch, -20, -1))


def test_weak_augment_only_rolls_frames(image):
    out = weak_augment(image, np.random.default_rng(1))
    assert out.shape == image.shape
    np.testing.assert_allclose(
        np.sort(out.values.sum(axis=0)), np.sort(image.values.sum(axis=0)), rtol=1e-5
    )


def test_strong_augment_masks_bands(image):
    out = strong_augment(image, np.random.default_rng(1))
    assert out.shape == image.shape
    assert np.all(np.isfinite(out.values))
    mean = image.values.mean()
    masked_frames = np.all(np.isclose(out.values, mean, atol=1e-5), axis=0)
    masked_bins = np.all(np.isclose(out.values, mean, atol=1e-5), axis=1)
    assert masked_frames.any()
    assert masked_bins.any()


def test_strong_augment_only_rolls_and_masks(image):
    mean = image.values.mean()
    for seed in range(200):
        out = strong_augment(image, np.random.default_rng(seed)).values
        masked = np.isclose(out, mean, atol=1e-5)
        assert masked.mean() <= 0.30
        # the unmasked entries are a shifted copy of the input, unscaled
        assert any(
            np.allclose(out[~masked], np.roll(image.values, shift, axis=-1)[~masked])
            for shift in range(-5, 6)
        )


def test_augment_batch_is_seeded(spectrogram_batch):
    first = augment_batch(spectrogram_batch, np.random.default_rng(5), strong=True)
    second = augment_batch(spectrogram_batch, np.random.default_rng(5), strong=True)
    assert first.shape == spectrogram_batch.shape
    assert first.dtype == spectrogram_batch.dtype
    torch.testing.assert_close(first, second)
