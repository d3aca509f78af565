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
import copy
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping

import torch

from audiotta.conmix.config import MtdaConfig, StdaConfig
from audiotta.conmix.losses import mixup_loss
from audiotta.conmix.stda import stda_adapt
from audiotta.core.errors import FewerThanTwoDomains
from audiotta.core.utils import config_hash, derive_seed
from audiotta.io.checkpoint import load_checkpoint
from audiotta.models import AdaptableModel, ModelConfig, build_model
from audiotta.models.training import predict

LOG = logging.getLogger("audiotta")


class TeacherBank:
    """Adapted teacher models keyed by target domain, all of one architecture"""

    def __init__(self, teachers: Mapping[str, AdaptableModel]):
        self.teachers: Dict[str, AdaptableModel] = dict(teachers)
        hashes = {domain: config_hash(model.config) for domain, model in self.teachers.items()}
        if len(set(hashes.values())) > 1:
            raise ValueError(
                f"All teachers must share one architecture, got config hashes {hashes}"
            )

    @classmethod
    def from_checkpoints(cls, paths: Mapping[str, str], storage_options=None) -> "TeacherBank":
        """Teachers saved with ``save_checkpoint``, keyed by target domain"""
        return cls(
            {
                domain: load_checkpoint(path, storage_options=storage_options)[0]
                for domain, path in paths.items()
            }
        )

    @classmethod
    def from_stda(
        cls,
        source_model: AdaptableModel,
        target_sets: Mapping[str, torch.Tensor],
        config: StdaConfig = None,
    ) -> "TeacherBank":
        """One STDA-adapted copy of ``source_model`` per target domain"""
        teachers = {}
        for domain in sorted(target_sets):
            LOG.info("Adapting teacher for target domain %s", domain)
            teacher = copy.deepcopy(source_model)
            teachers[domain] = stda_adapt(teacher, target_sets[domain], config).model
        return cls(teachers)

    @property
    def domains(self) -> List[str]:
        return sorted(self.teachers)

    @property
    def student_config(self) -> ModelConfig:
        return next(iter(self.teachers.values())).config

    def __getitem__(self, domain: str) -> AdaptableModel:
        return self.teachers[domain]

    def __len__(self):
        return len(self.teachers)

    def pseudo_labels(self, domain: str, x: torch.Tensor) -> torch.Tensor:
        teacher = self.teachers[domain].eval()
        return predict(teacher, x)


@dataclass
class MtdaResult:
    student: AdaptableModel
    history: List[Dict[str, float]] = field(default_factory=list)


def mtda_train(
    teachers: TeacherBank,
    target_sets: Mapping[str, torch.Tensor],
    config: MtdaConfig = None,
    mix_lambda_dist: torch.distributions.Distribution = None,
) -> MtdaResult:
    """Distill the teachers of several target domains into one student trained from scratch

    Each step picks a pair of domains, draws a batch from both and mixes
    them sample by sample, ``x = lam * x_i + (1 - lam) * x_j``. The student
    is trained on ``lam * CE(y_i) + (1 - lam) * CE(y_j)`` where ``y_i`` and
    ``y_j`` are the labels predicted by the teachers of the two domains.

    Parameters
    ----------
    teachers : TeacherBank
        One adapted teacher per target domain
    target_sets : Mapping[str, torch.Tensor]
        Unlabeled spectrograms per target domain
    config : MtdaConfig
        Schedule and optimizer settings
    mix_lambda_dist : torch.distributions.Distribution, optional
        Distribution of the mixing weights, ``Beta(0.3, 0.3)`` by default

    Raises
    ------
    FewerThanTwoDomains
        If fewer than two target domains are given
    """
    config = config or MtdaConfig()
    domains = sorted(target_sets)
    if len(domains) < 2:
        raise FewerThanTwoDomains(f"Need at least two target domains, got {domains}")
    missing = [domain for domain in domains if domain not in teachers.teachers]
    if missing:
        raise KeyError(f"No teacher for target domains {missing}")

    labels = {domain: teachers.pseudo_labels(domain, target_sets[domain]) for domain in domains}
    if mix_lambda_dist is None:
        alpha = torch.tensor(config.mix_alpha)
        mix_lambda_dist = torch.distributions.Beta(alpha, alpha)

    student = build_model(teachers.student_config, seed=derive_seed(config.seed, "student_init"))
    optimizer = torch.optim.SGD(student.parameters(), lr=config.lr, momentum=config.momentum)
    pairs = list(itertools.combinations(domains, 2))
    steps = -(-max(len(target_sets[d]) for d in domains) // config.batch_size)
    result = MtdaResult(student)

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(derive_seed(config.seed, "mixing"))
        student.train()
        for epoch in range(config.epochs):
            total = 0.0
            for _ in range(steps):
                domain_i, domain_j = pairs[int(torch.randint(len(pairs), ()))]
                index_i = torch.randint(len(target_sets[domain_i]), (config.batch_size,))
                index_j = torch.randint(len(target_sets[domain_j]), (config.batch_size,))
                lam = mix_lambda_dist.sample((config.batch_size,)).to(torch.float32)
                weight = lam.view(-1, *([1] * (target_sets[domain_i].dim() - 1)))
                mixed = (
                    weight * target_sets[domain_i][index_i]
                    + (1 - weight) * target_sets[domain_j][index_j]
                )
                loss = mixup_loss(
                    student(mixed), labels[domain_i][index_i], labels[domain_j][index_j], lam
                )
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                total += loss.item()
            result.history.append({"epoch": epoch, "loss": total / steps})
            LOG.info("mtda epoch %d: loss %.4f", epoch, total / steps)
    student.eval()
    return result
