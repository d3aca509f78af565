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
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
import torch
from torch.utils.data import DataLoader, TensorDataset

from audiotta.conmix.config import PLVariant, StdaConfig
from audiotta.conmix.losses import (
    consistency_loss,
    nuclear_norm_loss,
    pseudo_label_loss_ce,
    pseudo_label_loss_nll,
)
from audiotta.conmix.pseudo_labels import PseudoLabelSet, generate_pseudo_labels
from audiotta.core.utils import derive_seed
from audiotta.features.augment import augment_batch
from audiotta.features.config import FeatureConfig
from audiotta.models.base import AdaptableModel
from audiotta.models.training import error_rate, predict
from audiotta.schema import ParamGroup

LOG = logging.getLogger("audiotta")

STEP_COLUMNS = ["epoch", "step", "nm_loss", "pl_loss", "cons_loss", "total_loss"]
EPOCH_COLUMNS = [
    "epoch",
    "nm_loss",
    "pl_loss",
    "cons_loss",
    "total_loss",
    "error",
    "pseudo_label_error",
]


@dataclass
class StdaResult:
    """Adapted model with its loss traces.

    ``steps`` has one row per optimizer step with every loss component
    (0 for disabled ones) and the weighted total. ``epochs`` has the mean
    of each component per epoch plus error rates when labels were given.
    """

    model: AdaptableModel
    steps: pd.DataFrame
    epochs: pd.DataFrame
    pseudo_labels: Optional[PseudoLabelSet] = None
    initial_error: Optional[float] = None

    @property
    def final_error(self) -> Optional[float]:
        if self.epochs.empty:
            return None
        return self.epochs["error"].iloc[-1]


def stda_adapt(
    model: AdaptableModel,
    test_x: torch.Tensor,
    config: StdaConfig = None,
    test_y: Optional[torch.Tensor] = None,
    feature_config: FeatureConfig = None,
) -> StdaResult:
    """Adapt every parameter of ``model`` to an unlabeled target set

    Per epoch, pseudo labels are regenerated by centroid refinement. Each
    batch is seen through a weak and a strong augmentation; the nuclear
    norm and pseudo-label losses use the weak view, and the consistency
    loss asks the strong view to match the weak one.

    Parameters
    ----------
    model : AdaptableModel
        Pre-trained source model, adapted in place
    test_x : torch.Tensor
        Target spectrograms (m, 1, M, T)
    config : StdaConfig
        Loss weights, switches and schedule
    test_y : torch.Tensor, optional
        Ground truth, only used to report error rates
    feature_config : FeatureConfig, optional
        Augmentation settings

    Raises
    ------
    AllLossesDisabled
        If no loss component would contribute
    """
    config = (config or StdaConfig()).validate()
    weights = None
    if config.class_weights is not None:
        weights = torch.tensor(config.class_weights, dtype=torch.float32)
    rng = np.random.default_rng(derive_seed(config.seed, "augment"))
    generator = torch.Generator()
    generator.manual_seed(derive_seed(config.seed, "order"))
    loader = DataLoader(
        TensorDataset(test_x, torch.arange(len(test_x))),
        batch_size=config.batch_size,
        shuffle=True,
        generator=generator,
    )

    params = model.set_trainable(list(ParamGroup))
    optimizer = torch.optim.SGD(params, lr=config.lr, momentum=config.momentum)
    initial_error = None
    if test_y is not None:
        model.eval()
        initial_error = error_rate(predict(model, test_x), test_y)

    step_rows, epoch_rows = [], []
    pseudo_labels = None
    for epoch in range(config.epochs):
        if config.uses_pseudo_labels:
            pseudo_labels = generate_pseudo_labels(model, test_x, config.refinement_rounds)
            labels = pseudo_labels.as_tensor()
        model.train()
        for step, (x, index) in enumerate(loader):
            weak = augment_batch(x, rng, strong=False, config=feature_config)
            logits_weak = model(weak)
            components = {}
            if config.use_nm:
                components["nm_loss"] = nuclear_norm_loss(logits_weak, config.nm_on_logits)
            if config.pl_variant is PLVariant.ORG:
                components["pl_loss"] = pseudo_label_loss_ce(logits_weak, labels[index])
            elif config.pl_variant is PLVariant.UPD:
                components["pl_loss"] = pseudo_label_loss_nll(logits_weak, labels[index], weights)
            if config.use_cons:
                strong = augment_batch(x, rng, strong=True, config=feature_config)
                components["cons_loss"] = consistency_loss(
                    model(strong), logits_weak.softmax(dim=1)
                )

            lambdas = {
                "nm_loss": config.lambda1,
                "pl_loss": config.lambda2,
                "cons_loss": config.lambda3,
            }
            total = sum(lambdas[name] * value.double() for name, value in components.items())
            optimizer.zero_grad()
            total.backward()
            optimizer.step()

            row = {"epoch": epoch, "step": step, "nm_loss": 0.0, "pl_loss": 0.0, "cons_loss": 0.0}
            row.update({name: value.item() for name, value in components.items()})
            row["total_loss"] = total.item()
            step_rows.append(row)
            LOG.debug("stda epoch %d step %d: %s", epoch, step, row)

        epoch_row = _summarize_epoch(epoch, step_rows, config)
        if test_y is not None:
            model.eval()
            epoch_row["error"] = error_rate(predict(model, test_x), test_y)
            if pseudo_labels is not None:
                epoch_row["pseudo_label_error"] = 100.0 * (
                    1.0 - pseudo_labels.agreement(np.asarray(test_y))
                )
        epoch_rows.append(epoch_row)
        LOG.info(
            "stda epoch %d: total %.4f pseudo-label loss %s error %s",
            epoch,
            epoch_row["total_loss"],
            epoch_row["pl_loss"],
            epoch_row["error"],
        )

    model.eval()
    return StdaResult(
        model,
        pd.DataFrame(step_rows, columns=STEP_COLUMNS),
        pd.DataFrame(epoch_rows, columns=EPOCH_COLUMNS),
        pseudo_labels,
        initial_error,
    )


def _summarize_epoch(epoch: int, step_rows, config: StdaConfig) -> dict:
    rows = pd.DataFrame([row for row in step_rows if row["epoch"] == epoch])
    summary = {"epoch": epoch, "error": None, "pseudo_label_error": None}
    for column in ("nm_loss", "pl_loss", "cons_loss", "total_loss"):
        summary[column] = float(rows[column].mean())
    if not config.uses_pseudo_labels:
        summary["pl_loss"] = None
    return summary
