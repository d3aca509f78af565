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
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union


class ModelFamily(Enum):
    """Architectures, one per adaptation method family"""

    BN_RESNET = "bn_resnet"  # Tent / Norm
    DUAL_HEAD_RESNET = "dual_head_resnet"  # TTT
    GN_TRANSFORMER = "gn_transformer"  # CoNMix


class Head(Enum):
    CLASS = "class"
    PRETEXT = "pretext"


# blocks per stage (resnets) or attention blocks (transformer)
DEFAULT_DEPTH = {
    ModelFamily.BN_RESNET: 2,
    ModelFamily.DUAL_HEAD_RESNET: 4,
    ModelFamily.GN_TRANSFORMER: 4,
}

NUM_STAGES = {ModelFamily.BN_RESNET: 2, ModelFamily.DUAL_HEAD_RESNET: 3}


@dataclass(frozen=True)
class ModelConfig:
    """Architecture settings, small enough to train on a CPU by default."""

    family: ModelFamily
    num_classes: int = 10
    width: int = 16
    depth: Optional[int] = None
    num_shift_classes: int = 3
    time_bins: int = 4
    attention_heads: int = 4
    groups: int = 4
    token_grid: Tuple[int, int] = (4, 8)

    def __post_init__(self):
        family = self.family if isinstance(self.family, ModelFamily) else ModelFamily(self.family)
        object.__setattr__(self, "family", family)
        if self.depth is None:
            object.__setattr__(self, "depth", DEFAULT_DEPTH[family])
        object.__setattr__(self, "token_grid", tuple(self.token_grid))

        if self.num_classes < 2:
            raise ValueError(f"num_classes must be at least 2, got {self.num_classes}")
        if self.num_shift_classes != 3:
            raise ValueError("The time-shift pretext task has exactly 3 classes")
        if self.width <= 0 or self.depth <= 0 or self.time_bins <= 0:
            raise ValueError("width, depth and time_bins must be positive")
        if family is ModelFamily.GN_TRANSFORMER:
            if self.depth > 12:
                raise ValueError(f"At most 12 attention blocks are supported, got {self.depth}")
            if self.width % self.groups:
                raise ValueError(f"width {self.width} is not divisible by groups {self.groups}")
            if self.embed_dim % self.attention_heads:
                raise ValueError(
                    f"embedding size {self.embed_dim} is not divisible by "
                    f"{self.attention_heads} attention heads"
                )

    @property
    def embed_dim(self) -> int:
        return 4 * self.width

    @property
    def num_stages(self) -> Optional[int]:
        return NUM_STAGES.get(self.family)

    @classmethod
    def from_dict(cls, config: dict) -> "ModelConfig":
        return cls(**config)

    @classmethod
    def for_family(cls, family: Union[str, ModelFamily], num_classes: int, **kwargs):
        return cls(family=ModelFamily(family), num_classes=num_classes, **kwargs)
