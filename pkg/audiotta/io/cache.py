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
import posixpath
from typing import Dict, Optional

import fsspec
import numpy as np
import pandas as pd

from audiotta.core.utils import config_hash
from audiotta.features.config import FeatureConfig
from audiotta.features.spectrogram import SpectrogramImage

INDEX_FILE = "index.parquet"


class SpectrogramCache:
    """On-disk cache of spectrograms for one feature configuration.

    Every image is stored as its own ``.npy`` file under a directory named
    after the config hash. A parquet index lists path, shape, dtype and
    config hash of every entry; call ``flush`` to persist it.

    Parameters
    ----------
    root : str
        Cache directory (local path or fsspec url)
    config : FeatureConfig
        Front-end settings the cached images were computed with
    """

    def __init__(self, root: str, config: FeatureConfig, storage_options=None):
        self.config = config
        self.config_hash = config_hash(config)
        self.root = posixpath.join(root.rstrip("/"), self.config_hash)
        self.fs, _, _ = fsspec.core.get_fs_token_paths(
            self.root, mode="wb", storage_options=storage_options
        )
        self.fs.makedirs(self.root, exist_ok=True)
        self._index: Dict[str, dict] = {}
        index_path = posixpath.join(self.root, INDEX_FILE)
        if self.fs.exists(index_path):
            with self.fs.open(index_path, "rb") as f:
                for row in pd.read_parquet(f, engine="pyarrow").to_dict("records"):
                    row["shape"] = tuple(int(dim) for dim in row["shape"])
                    self._index[row["key"]] = row

    def _path(self, key: str) -> str:
        return posixpath.join(self.root, f"{key}.npy")

    def __contains__(self, key: str) -> bool:
        return key in self._index

    def __len__(self):
        return len(self._index)

    def put(self, key: str, image: SpectrogramImage):
        path = self._path(key)
        parent = posixpath.dirname(path)
        self.fs.makedirs(parent, exist_ok=True)
        with self.fs.open(path, "wb") as f:
            np.save(f, image.values)
        self._index[key] = {
            "key": key,
            "path": path,
            "shape": tuple(image.values.shape),
            "dtype": str(image.values.dtype),
            "config_hash": self.config_hash,
        }

    def get(self, key: str) -> Optional[SpectrogramImage]:
        entry = self._index.get(key)
        if entry is None:
            return None
        with self.fs.open(entry["path"], "rb") as f:
            values = np.load(f)
        if tuple(values.shape) != entry["shape"]:
            raise ValueError(
                f"Cached spectrogram {key} has shape {values.shape}, expected {entry['shape']}"
            )
        return SpectrogramImage(values)

    @property
    def index(self) -> pd.DataFrame:
        rows = [{**row, "shape": list(row["shape"])} for row in self._index.values()]
        return pd.DataFrame(rows, columns=["key", "path", "shape", "dtype", "config_hash"])

    def flush(self):
        with self.fs.open(posixpath.join(self.root, INDEX_FILE), "wb") as f:
            self.index.to_parquet(f, engine="pyarrow", index=False)
