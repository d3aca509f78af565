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


def get_fs(path: str, storage_options=None, for_write: bool = False):
    """Filesystem for ``path``; when writing, the parent directory is created"""
    mode = "wb" if for_write else "rb"
    fs, _, _ = fsspec.core.get_fs_token_paths(path, mode=mode, storage_options=storage_options)
    if for_write:
        parent = path.rstrip("/").rsplit("/", 1)[0] if "/" in path else ""
        if parent:
            fs.makedirs(parent, exist_ok=True)
    return fs
