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
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import tomli

from audiotta.adapt.online import OnlineAdaptConfig
from audiotta.conmix.config import MtdaConfig, StdaConfig
from audiotta.features.config import FeatureConfig
from audiotta.harness.experiment import ExperimentCell
from audiotta.harness.runner import RunContext, build_grid
from audiotta.io.fs import get_fs
from audiotta.models.training import TrainConfig

GRID_KEYS = {"methods", "datasets", "noises", "snrs", "lambdas", "seeds", "variants", "epochs"}
PATH_KEYS = {"data", "noise_root", "checkpoint_dir", "records_dir", "cache_dir", "report_dir"}
TOY_KEYS = {"num_classes", "per_class"}
SECTIONS = {
    "grid": GRID_KEYS,
    "paths": PATH_KEYS,
    "features": {f.name for f in dataclasses.fields(FeatureConfig)},
    "training": {f.name for f in dataclasses.fields(TrainConfig)},
    "adapter": {f.name for f in dataclasses.fields(OnlineAdaptConfig)},
    "conmix": {f.name for f in dataclasses.fields(StdaConfig)},
    "mtda": {f.name for f in dataclasses.fields(MtdaConfig)},
    "toy": TOY_KEYS,
}


def _check_keys(where: str, data: Dict[str, Any], valid):
    unknown = sorted(set(data) - set(valid))
    if unknown:
        raise ValueError(f"Unknown keys {unknown} in [{where}], valid keys are {sorted(valid)}")


@dataclass(frozen=True)
class GridConfig:
    """An experiment grid and everything its cells share.

    Read from a TOML file with ``[grid]``, ``[paths]``, ``[features]``,
    ``[training]``, ``[adapter]``, ``[conmix]``, ``[mtda]`` and ``[toy]`` sections; for
    example::

        [grid]
        methods = ["tent", "norm", "ttt", "conmix"]
        datasets = ["toy"]
        noises = ["dd", "eb", "rt", "gauss"]
        snrs = [3, 10]
        seeds = [0, 1, 2]

        [paths]
        records_dir = "runs/records"

        [paths.data]
        sc = "/data/speech_commands_v0.01"

        [conmix]
        lambda2 = 0.3
    """

    methods: Tuple[str, ...] = ("tent", "norm", "ttt", "conmix")
    datasets: Tuple[str, ...] = ("toy",)
    noises: Tuple[str, ...] = ("dd", "eb", "rt")
    snrs: Tuple[float, ...] = (3.0, 10.0)
    lambdas: Tuple[float, ...] = (0.005,)
    seeds: Tuple[int, ...] = (0,)
    variants: Tuple[Optional[str], ...] = (None,)
    epochs: Optional[int] = None
    context: RunContext = field(default_factory=RunContext)
    report_dir: str = "reports"
    features: FeatureConfig = field(default_factory=FeatureConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    adapter: OnlineAdaptConfig = field(default_factory=OnlineAdaptConfig)
    stda: Optional[StdaConfig] = None
    mtda: MtdaConfig = field(default_factory=MtdaConfig)
    toy_num_classes: int = 10
    toy_per_class: int = 50

    def cells(self) -> List[ExperimentCell]:
        return build_grid(
            self.methods,
            self.datasets,
            self.noises,
            snrs=self.snrs,
            lambdas=self.lambdas,
            seeds=self.seeds,
            variants=self.variants,
            epochs=self.epochs,
            features=self.features,
            train=self.train,
            adapter=self.adapter,
            stda=self.stda,
            toy_num_classes=self.toy_num_classes,
            toy_per_class=self.toy_per_class,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridConfig":
        """Build a grid from parsed TOML; unknown sections or keys raise ``ValueError``"""
        _check_keys("top level", data, SECTIONS)
        for section, valid in SECTIONS.items():
            _check_keys(section, data.get(section, {}), valid)

        grid = dict(data.get("grid", {}))
        for key in ("methods", "datasets", "noises", "snrs", "lambdas", "seeds"):
            if key in grid:
                grid[key] = tuple(grid[key])
        grid["variants"] = tuple(grid.get("variants") or ()) or (None,)

        paths = dict(data.get("paths", {}))
        report_dir = paths.pop("report_dir", "reports")
        context = RunContext(data_roots=dict(paths.pop("data", {})), **paths)

        toy = data.get("toy", {})
        return cls(
            **grid,
            context=context,
            report_dir=report_dir,
            features=FeatureConfig(**data.get("features", {})),
            train=TrainConfig(**data.get("training", {})),
            adapter=OnlineAdaptConfig(**data.get("adapter", {})),
            stda=StdaConfig(**data["conmix"]) if "conmix" in data else None,
            mtda=MtdaConfig(**data.get("mtda", {})),
            toy_num_classes=toy.get("num_classes", 10),
            toy_per_class=toy.get("per_class", 50),
        )

    @classmethod
    def from_toml(cls, path: str, storage_options=None) -> "GridConfig":
        fs = get_fs(path, storage_options)
        if not fs.exists(path):
            raise FileNotFoundError(f"Grid config {path} does not exist")
        with fs.open(path, "rb") as f:
            return cls.from_dict(tomli.load(f))
