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
import fsspec
import pandas as pd

from audiotta.io.fs import get_fs

MANIFEST_COLUMNS = ["path", "label", "noise_offset", "realized_snr"]


def write_manifest(path: str, manifest: pd.DataFrame, storage_options=None):
    """Write a manifest as CSV, one row per sample"""
    fs = get_fs(path, storage_options, for_write=True)
    with fs.open(path, "w") as f:
        manifest.to_csv(f, index=False)


def read_manifest(path: str, storage_options=None) -> pd.DataFrame:
    """Read a manifest back; labels are strings, an empty label stays empty"""
    with fsspec.open(path, "r", **(storage_options or {})) as f:
        return pd.read_csv(
            f,
            dtype={"path": str, "label": str},
            keep_default_na=False,
            na_values={"noise_offset": [""], "realized_snr": ["", "nan", "NaN"]},
        )
