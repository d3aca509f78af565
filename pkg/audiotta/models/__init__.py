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
from typing import Optional

import torch

from audiotta.models.base import AdaptableModel
from audiotta.models.config import Head, ModelConfig, ModelFamily
from audiotta.models.resnet import FAMILY_MODELS, BNResNet, DualHeadResNet
from audiotta.models.transformer import GNTransformer

FAMILY_MODELS = {**FAMILY_MODELS, ModelFamily.GN_TRANSFORMER: GNTransformer}


def build_model(config: ModelConfig, seed: Optional[int] = None) -> AdaptableModel:
    """Instantiate the model of ``config.family``, seeding its initialization if asked

    The global torch random state is left untouched.
    """
    with torch.random.fork_rng(devices=[]):
        if seed is not None:
            torch.manual_seed(seed)
        model = FAMILY_MODELS[config.family](config)
    return model.eval()


__all__ = [
    "AdaptableModel",
    "BNResNet",
    "DualHeadResNet",
    "GNTransformer",
    "Head",
    "ModelConfig",
    "ModelFamily",
    "build_model",
]
