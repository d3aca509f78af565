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
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import torch
from torch.utils.data import DataLoader, TensorDataset

from audiotta.core.errors import DivergedLoss, HeadUnavailable
from audiotta.features.augment import make_pretext_batch
from audiotta.models.base import AdaptableModel
from audiotta.models.config import Head
from audiotta.models.losses import cross_entropy
from audiotta.schema import ParamGroup

LOG = logging.getLogger("audiotta")


@dataclass(frozen=True)
class TrainConfig:
    """Source pre-training settings (SGD with momentum)"""

    epochs: int = 20
    lr: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 0.0
    batch_size: int = 32
    seed: int = 0
    shift_fraction: float = 0.2
    frozen_groups: Tuple[ParamGroup, ...] = ()

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        object.__setattr__(
            self, "frozen_groups", tuple(ParamGroup(g) for g in self.frozen_groups)
        )


@dataclass
class TrainResult:
    model: AdaptableModel
    history: List[Dict[str, float]] = field(default_factory=list)


def _loader(dataset: TensorDataset, batch_size: int, seed: int, shuffle=True) -> DataLoader:
    generator = torch.Generator()
    generator.manual_seed(seed)
    return DataLoader(dataset, batch_size=batch_size, shuffle=shuffle, generator=generator)


def _optimizer(model: AdaptableModel, config: TrainConfig) -> torch.optim.Optimizer:
    frozen = set(model.param_schema().select_by_tag(list(config.frozen_groups)).names)
    params = []
    for name, param in model.named_parameters():
        param.requires_grad_(name not in frozen)
        if name not in frozen:
            params.append(param)
    return torch.optim.SGD(
        params, lr=config.lr, momentum=config.momentum, weight_decay=config.weight_decay
    )


def _check_finite(loss: torch.Tensor, epoch: int, step: int):
    if not torch.isfinite(loss):
        raise DivergedLoss(f"Loss became {loss.item()} at epoch {epoch}, step {step}")


def pretrain_classifier(
    model: AdaptableModel, train_set: TensorDataset, config: TrainConfig = None
) -> TrainResult:
    """Train the class head and backbone with cross entropy on labeled source data

    Parameters
    ----------
    model : AdaptableModel
        Freshly initialized model, trained in place
    train_set : TensorDataset
        Spectrogram images (N, 1, M, T) and labels (N,)
    config : TrainConfig
        Optimizer and schedule

    Returns
    -------
    TrainResult
        The trained model and one history row per epoch (loss, accuracy)

    Raises
    ------
    DivergedLoss
        If a non-finite loss is encountered
    """
    config = config or TrainConfig()
    result = TrainResult(model)
    if config.epochs == 0:
        return result

    optimizer = _optimizer(model, config)
    loader = _loader(train_set, config.batch_size, config.seed)
    model.train()
    for epoch in range(config.epochs):
        total, correct, seen = 0.0, 0, 0
        for step, (x, y) in enumerate(loader):
            logits = model(x)
            loss = cross_entropy(logits, y)
            _check_finite(loss, epoch, step)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item() * len(y)
            correct += int((logits.argmax(1) == y).sum())
            seen += len(y)
        row = {"epoch": epoch, "loss": total / seen, "accuracy": correct / seen}
        result.history.append(row)
        LOG.info("pretrain epoch %d: loss %.4f accuracy %.3f", epoch, row["loss"], row["accuracy"])
    model.eval()
    return result


def ttt_joint_loss(
    model: AdaptableModel, x: torch.Tensor, y: torch.Tensor, shift_fraction: float = 0.2
) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Class cross entropy plus time-shift pretext cross entropy

    Returns
    -------
    Tuple[torch.Tensor, torch.Tensor, torch.Tensor]
        ``(total, class_loss, pretext_loss)`` with ``total = class_loss + pretext_loss``
    """
    class_loss = cross_entropy(model(x, head=Head.CLASS), y)
    shifted, shift_labels = make_pretext_batch(x, shift_fraction)
    pretext_loss = cross_entropy(model(shifted, head=Head.PRETEXT), shift_labels)
    return class_loss + pretext_loss, class_loss, pretext_loss


def pretrain_ttt(
    model: AdaptableModel, train_set: TensorDataset, config: TrainConfig = None
) -> TrainResult:
    """Jointly train both heads of a dual-head model on labeled source data.

    Every batch is tripled with the three shift classes for the pretext
    head. History rows carry the class and pretext losses separately.
    """
    config = config or TrainConfig()
    result = TrainResult(model)
    if config.epochs == 0:
        return result
    if not model.has_pretext_head:
        raise HeadUnavailable(f"{type(model).__name__} has no pretext head to pre-train")

    optimizer = _optimizer(model, config)
    loader = _loader(train_set, config.batch_size, config.seed)
    model.train()
    for epoch in range(config.epochs):
        sums = {"loss": 0.0, "class_loss": 0.0, "pretext_loss": 0.0}
        seen = 0
        for step, (x, y) in enumerate(loader):
            loss, class_loss, pretext_loss = ttt_joint_loss(model, x, y, config.shift_fraction)
            _check_finite(loss, epoch, step)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            for key, value in zip(sums, (loss, class_loss, pretext_loss)):
                sums[key] += value.item() * len(y)
            seen += len(y)
        row = {"epoch": epoch, **{key: value / seen for key, value in sums.items()}}
        result.history.append(row)
        LOG.info(
            "ttt pretrain epoch %d: class loss %.4f pretext loss %.4f",
            epoch,
            row["class_loss"],
            row["pretext_loss"],
        )
    model.eval()
    return result


def predict(
    model: AdaptableModel, x: torch.Tensor, head=Head.CLASS, batch_size: int = 256
) -> torch.Tensor:
    """Argmax predictions without touching the model's mode or weights"""
    preds = []
    with torch.no_grad():
        for start in range(0, len(x), batch_size):
            preds.append(model(x[start : start + batch_size], head=head).argmax(1))
    return torch.cat(preds) if preds else torch.empty(0, dtype=torch.long)


def error_rate(predictions: Sequence[int], labels: Sequence[int]) -> float:
    """Top-1 error in percent, ``100 * (1 - accuracy)``"""
    predictions = np.asarray(torch.as_tensor(predictions).cpu())
    labels = np.asarray(torch.as_tensor(labels).cpu())
    if predictions.shape != labels.shape or predictions.size == 0:
        raise ValueError(
            f"Need equally many predictions and labels, got {predictions.shape} and {labels.shape}"
        )
    return 100.0 * (1.0 - float(np.mean(predictions == labels)))
