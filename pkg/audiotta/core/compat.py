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
import torch
from packaging.version import Version

TORCH_VERSION = Version(torch.__version__)

# `torch.load(weights_only=...)` exists from 1.13 on
HAS_WEIGHTS_ONLY_LOAD = TORCH_VERSION >= Version("1.13")


def torch_load_kwargs():
    return {"weights_only": True} if HAS_WEIGHTS_ONLY_LOAD else {}
