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
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

from audiotta.core.errors import AllLossesDisabled


class PLVariant(Enum):
    """Pseudo-label loss flavour"""

    ORG = "org"  # cross entropy on softmax outputs
    UPD = "upd"  # weighted negative log-likelihood on log-softmax outputs
    NONE = "none"


class AblationVariant(Enum):
    ORG = "org"
    UPD = "upd"
    NO_PL = "no_pl"
    NO_CST = "no_cst"
    NO_NM = "no_nm"


@dataclass(frozen=True)
class StdaConfig:
    """Single-target adaptation settings.

    The composite loss is
    ``lambda1 * nuclear_norm + lambda2 * pseudo_label + lambda3 * consistency``
    where each component can be switched off.
    """

    lambda1: float = 1.0
    lambda2: float = 0.3
    lambda3: float = 1.0
    pl_variant: PLVariant = PLVariant.UPD
    use_nm: bool = True
    use_cons: bool = True
    epochs: int = 5
    refinement_rounds: int = 2
    lr: float = 5e-3
    momentum: float = 0.9
    batch_size: int = 64
    nm_on_logits: bool = False
    class_weights: Optional[Tuple[float, ...]] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pl_variant", PLVariant(self.pl_variant))
        if min(self.lambda1, self.lambda2, self.lambda3) < 0:
            raise ValueError(
                f"Loss weights must be >= 0, got {self.lambda1}, {self.lambda2}, {self.lambda3}"
            )
        if self.epochs < 1 or self.refinement_rounds < 1 or self.batch_size < 1:
            raise ValueError("epochs, refinement_rounds and batch_size must be >= 1")
        if self.class_weights is not None:
            object.__setattr__(self, "class_weights", tuple(float(w) for w in self.class_weights))

    @property
    def uses_pseudo_labels(self) -> bool:
        return self.pl_variant is not PLVariant.NONE

    def validate(self):
        """Raise ``AllLossesDisabled`` unless at least one weighted component is active"""
        active = (
            (self.use_nm and self.lambda1 > 0)
            or (self.uses_pseudo_labels and self.lambda2 > 0)
            or (self.use_cons and self.lambda3 > 0)
        )
        if not active:
            raise AllLossesDisabled(
                "Every loss component is disabled or has a zero weight: "
                f"use_nm={self.use_nm} lambda1={self.lambda1}, "
                f"pl_variant={self.pl_variant.value} lambda2={self.lambda2}, "
                f"use_cons={self.use_cons} lambda3={self.lambda3}"
            )
        return self

    @classmethod
    def for_dataset(cls, dataset: str, **kwargs) -> "StdaConfig":
        """Dataset profile: AudioMNIST drops the pseudo-label loss, the rest use ``upd``"""
        variant = PLVariant.NONE if str(dataset).lower() == "am" else PLVariant.UPD
        return cls(pl_variant=variant, **kwargs)

    def with_variant(self, variant) -> "StdaConfig":
        """Ablation preset; ``no_*`` variants start from the ``upd`` loss"""
        variant = AblationVariant(variant)
        return {
            AblationVariant.ORG: replace(self, pl_variant=PLVariant.ORG),
            AblationVariant.UPD: replace(self, pl_variant=PLVariant.UPD),
            AblationVariant.NO_PL: replace(self, pl_variant=PLVariant.NONE),
            AblationVariant.NO_CST: replace(self, pl_variant=PLVariant.UPD, use_cons=False),
            AblationVariant.NO_NM: replace(self, pl_variant=PLVariant.UPD, use_nm=False),
        }[variant]


@dataclass(frozen=True)
class MtdaConfig:
    """Multi-target distillation settings; mixing weights follow Beta(mix_alpha, mix_alpha)"""

    epochs: int = 10
    lr: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64
    mix_alpha: float = 0.3
    seed: int = 0
