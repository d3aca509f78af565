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
import contextlib

import numpy as np
import pytest
import torch
from dask.distributed import Client, LocalCluster

from audiotta.corruption import make_toy_noise_bank
from audiotta.features.config import FeatureConfig
from audiotta.features.spectrogram import extract_batch
from audiotta.harness.datasets import load_split, make_toy_dataset
from audiotta.io.audio import Waveform
from audiotta.models import ModelConfig, ModelFamily, build_model

SMALL_MODELS = {
    ModelFamily.BN_RESNET: dict(width=8, depth=1),
    ModelFamily.DUAL_HEAD_RESNET: dict(width=8, depth=1),
    ModelFamily.GN_TRANSFORMER: dict(width=8, depth=1, attention_heads=2, groups=2),
}


@pytest.fixture(scope="module")
def client():
    cluster = LocalCluster(n_workers=2)
    client = Client(cluster)
    yield client
    client.close()
    cluster.close()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def tone():
    t = np.arange(16000) / 16000
    return Waveform(0.5 * np.sin(2 * np.pi * 440.0 * t), 16000)


@pytest.fixture(scope="session")
def toy_dataset():
    return make_toy_dataset(num_classes=4, per_class=20, seed=0)


@pytest.fixture(scope="session")
def noise_bank():
    return make_toy_noise_bank(sample_rate=16000, duration_s=5.0, seed=0)


@pytest.fixture(scope="session")
def toy_features(toy_dataset):
    """Spectrograms and labels of every split of the toy dataset"""
    config = FeatureConfig()
    features = {}
    for split in ("train", "val", "test"):
        waveforms, labels = load_split(toy_dataset, split)
        features[split] = (extract_batch(waveforms, config), torch.from_numpy(labels))
    return features


def small_model(family, num_classes=4, seed=0):
    family = ModelFamily(family)
    config = ModelConfig.for_family(family, num_classes, **SMALL_MODELS[family])
    return build_model(config, seed=seed)


@pytest.fixture
def spectrogram_batch():
    generator = torch.Generator().manual_seed(0)
    return torch.randn(8, 1, 64, 101, generator=generator)


def run_in_context(func, *args, context=None, **kwargs):
    # Convenience utility to execute a function within
    # a specific `context`.  For example, this can be
    # used to test that a function raises a `UserWarning`
    # by setting `context=pytest.warns(UserWarning)`
    if context is None:
        context = contextlib.suppress()
    with context:
        result = func(*args, **kwargs)
    return result

