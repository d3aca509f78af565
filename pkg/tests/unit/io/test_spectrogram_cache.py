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
import pandas as pd

from audiotta.features.config import FeatureConfig
from audiotta.features.spectrogram import SpectrogramImage
from audiotta.io.cache import SpectrogramCache


def test_cache_put_get_and_reload(tmpdir):
    config = FeatureConfig()
    image = SpectrogramImage(np.arange(12, dtype=np.float32).reshape(3, 4))

    cache = SpectrogramCache(str(tmpdir), config)
    assert cache.get("missing") is None
    cache.put("train/0", image)
    assert "train/0" in cache
    np.testing.assert_array_equal(cache.get("train/0").values, image.values)
    cache.flush()

    reloaded = SpectrogramCache(str(tmpdir), config)
    assert len(reloaded) == 1
    index = reloaded.index
    assert list(index.columns) == ["key", "path", "shape", "dtype", "config_hash"]
    assert index["shape"].iloc[0] == [3, 4]
    assert index["dtype"].iloc[0] == "float32"
    np.testing.assert_array_equal(reloaded.get("train/0").values, image.values)


def test_cache_is_keyed_by_config(tmpdir):
    image = SpectrogramImage(np.zeros((2, 2), dtype=np.float32))
    default = SpectrogramCache(str(tmpdir), FeatureConfig())
    default.put("a", image)
    default.flush()

    other = SpectrogramCache(str(tmpdir), FeatureConfig(mel_bins=32))
    assert "a" not in other
    assert default.root != other.root
    assert isinstance(other.index, pd.DataFrame)
