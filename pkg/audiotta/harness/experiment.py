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
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from audiotta.adapt.online import AdaptMode, OnlineAdaptConfig
from audiotta.conmix.config import AblationVariant, StdaConfig
from audiotta.core.utils import config_hash, derive_seed, to_jsonable
from audiotta.corruption import CorruptionSpec, NoiseSource
from audiotta.features.config import FeatureConfig
from audiotta.harness.datasets import DatasetId
from audiotta.models import ModelConfig, ModelFamily
from audiotta.models.training import TrainConfig

SEED_KEYS = ("corruption", "model_init", "adapter", "split")


class Method(Enum):
    TENT = "tent"
    NORM = "norm"
    TTT = "ttt"
    CONMIX = "conmix"

    @property
    def family(self) -> ModelFamily:
        return METHOD_FAMILIES[self]

    @property
    def adapt_mode(self) -> Optional[AdaptMode]:
        return None if self is Method.CONMIX else AdaptMode(self.value)


# architecture each method adapts; Tent and Norm share one checkpoint
METHOD_FAMILIES = {
    Method.TENT: ModelFamily.BN_RESNET,
    Method.NORM: ModelFamily.BN_RESNET,
    Method.TTT: ModelFamily.DUAL_HEAD_RESNET,
    Method.CONMIX: ModelFamily.GN_TRANSFORMER,
}


@dataclass(frozen=True)
class ExperimentCell:
    """One (method, dataset, noise, severity, seed) point of an experiment grid.

    Together with the dataset files a cell fully determines a run: every
    random choice is drawn from a sub-seed of ``seed``. ``severity`` is the
    SNR in dB for background noises and the noise level for the Gaussian
    shift. ``epochs`` overrides the method's own epoch count when set.
    """

    method: Method
    dataset: DatasetId
    noise: NoiseSource
    severity: float
    seed: int = 0
    epochs: Optional[int] = None
    variant: Optional[AblationVariant] = None
    features: FeatureConfig = field(default_factory=FeatureConfig)
    model: Optional[ModelConfig] = None
    train: TrainConfig = field(default_factory=TrainConfig)
    adapter: OnlineAdaptConfig = field(default_factory=OnlineAdaptConfig)
    stda: Optional[StdaConfig] = None
    toy_num_classes: int = 10
    toy_per_class: int = 50

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "dataset", DatasetId(self.dataset))
        object.__setattr__(self, "noise", NoiseSource.parse(self.noise))
        object.__setattr__(self, "severity", float(self.severity))
        if self.variant is not None:
            if self.method is not Method.CONMIX:
                raise ValueError(
                    f"Ablation variants only apply to conmix, got {self.variant} for "
                    f"{self.method.value}"
                )
            object.__setattr__(self, "variant", AblationVariant(self.variant))
        if self.model is not None and self.model.family is not self.method.family:
            raise ValueError(
                f"{self.method.value} adapts {self.method.family.value} models, "
                f"got a {self.model.family.value} config"
            )
        if self.epochs is not None and self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        # fails early on an invalid severity
        self.corruption_spec()

    @property
    def key(self) -> str:
        parts = [self.method.value, self.dataset.value, self.corruption_spec().label]
        if self.variant is not None:
            parts.append(self.variant.value)
        if self.epochs is not None:
            parts.append(f"e{self.epochs}")
        parts.append(f"s{self.seed}")
        return "-".join(parts)

    @property
    def seeds(self) -> Dict[str, int]:
        return {key: derive_seed(self.seed, key) for key in SEED_KEYS}

    def corruption_spec(self) -> CorruptionSpec:
        seed = derive_seed(self.seed, "corruption")
        if self.noise.is_background:
            return CorruptionSpec(self.noise, snr_db=self.severity, seed=seed)
        return CorruptionSpec(self.noise, lam=self.severity, seed=seed)

    def model_config(self, num_classes: int) -> ModelConfig:
        if self.model is None:
            return ModelConfig.for_family(self.method.family, num_classes)
        return replace(self.model, num_classes=num_classes)

    def train_config(self) -> TrainConfig:
        return replace(
            self.train,
            seed=derive_seed(self.seed, "model_init"),
            shift_fraction=self.features.shift_fraction,
        )

    def adapter_config(self) -> OnlineAdaptConfig:
        if self.epochs is None:
            return self.adapter
        return replace(self.adapter, epochs=self.epochs)

    def stda_config(self) -> StdaConfig:
        """Conmix settings; without explicit ones the dataset profile applies"""
        config = self.stda if self.stda is not None else StdaConfig.for_dataset(self.dataset.value)
        if self.variant is not None:
            config = config.with_variant(self.variant)
        config = replace(config, seed=derive_seed(self.seed, "adapter"))
        return config if self.epochs is None else replace(config, epochs=self.epochs)

    def pretrain_key(self) -> str:
        """Name of the source checkpoint, shared by every cell that pre-trains the same model"""
        setup = {
            "dataset": self.dataset,
            "family": self.method.family,
            "model": self.model,
            "train": self.train_config(),
            "features": self.features,
            "toy": [self.toy_num_classes, self.toy_per_class, self.seeds["split"]],
        }
        return f"{self.dataset.value}-{self.method.family.value}-{config_hash(setup)[:12]}"

    def to_dict(self) -> Dict[str, Any]:
        return to_jsonable(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentCell":
        data = dict(data)
        data["features"] = FeatureConfig(**data["features"])
        if data.get("model") is not None:
            data["model"] = ModelConfig.from_dict(data["model"])
        data["train"] = TrainConfig(**data["train"])
        data["adapter"] = OnlineAdaptConfig(**data["adapter"])
        if data.get("stda") is not None:
            data["stda"] = StdaConfig(**data["stda"])
        return cls(**data)


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one cell; the unit written to the record files.

    Error rates are top-1 percentages. The unadapted and adapted rates are
    measured on the same corrupted test set; ``clean_error`` is the frozen
    source model on the uncorrupted test set. ``epochs`` holds one row per
    adaptation epoch (``error`` plus mean loss components) and
    ``step_losses`` the loss of every adaptation step.
    """

    cell: ExperimentCell
    unadapted_error: float
    adapted_error: float
    clean_error: Optional[float] = None
    epochs: Tuple[Dict[str, Any], ...] = ()
    step_losses: Tuple[float, ...] = ()
    seeds: Dict[str, int] = field(default_factory=dict)
    config_hash: str = ""
    provenance: str = ""
    wall_clock: float = 0.0
    num_test: int = 0

    def __post_init__(self):
        object.__setattr__(self, "epochs", tuple(dict(row) for row in self.epochs))
        object.__setattr__(self, "step_losses", tuple(float(v) for v in self.step_losses))
        for name in ("unadapted_error", "adapted_error", "clean_error"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 100.0:
                raise ValueError(f"{name} must be a percentage in [0, 100], got {value}")
        if self.wall_clock < 0:
            raise ValueError(f"wall_clock must be >= 0, got {self.wall_clock}")

    @property
    def delta(self) -> float:
        """Adapted minus unadapted error; negative when adaptation helped"""
        return self.adapted_error - self.unadapted_error

    @property
    def epoch_errors(self) -> Tuple[float, ...]:
        return tuple(row["error"] for row in self.epochs if row.get("error") is not None)

    def to_dict(self) -> Dict[str, Any]:
        return to_jsonable(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunRecord":
        data = dict(data)
        data["cell"] = ExperimentCell.from_dict(data["cell"])
        return cls(**data)

