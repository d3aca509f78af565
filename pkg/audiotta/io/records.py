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
import json
from typing import Iterable, List

import fsspec

from audiotta.io.fs import get_fs


def write_jsonl(path: str, rows: Iterable[dict], append: bool = False, storage_options=None):
    """Write dictionaries as line-delimited JSON"""
    fs = get_fs(path, storage_options, for_write=True)
    with fs.open(path, "a" if append else "w") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")


def read_jsonl(path: str, storage_options=None) -> List[dict]:
    with fsspec.open(path, "r", **(storage_options or {})) as f:
        return [json.loads(line) for line in f if line.strip()]


def read_jsonl_dir(root: str, storage_options=None) -> List[dict]:
    """All rows of every ``*.jsonl`` file under ``root``, in sorted file order"""
    fs = get_fs(root, storage_options)
    rows = []
    for path in sorted(fs.glob(root.rstrip("/") + "/**/*.jsonl")):
        with fs.open(path, "r") as f:
            rows.extend(json.loads(line) for line in f if line.strip())
    return rows
