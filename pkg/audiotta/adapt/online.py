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
from enum import Enum
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

import torch

from audiotta.adapt.contracts import Snapshot, check_update_contract, restore, snapshot
from audiotta.core.errors import BatchTooSmall, HeadUnavailable, NoBNLayers
from audiotta.features.augment import make_pretext_batch
from audiotta.models.base import AdaptableModel
from audiotta.models.config import Head
from audiotta.models.losses import cross_entropy, entropy_loss
from audiotta.models.training import error_rate
from audiotta.schema import ParamGroup

LOG = logging.getLogger("audiotta")


class AdaptMode(Enum):
    TENT = "tent"
    NORM = "norm"
    TTT = "ttt"


# groups each mode may change
ALLOWED_UPDATES = {
    AdaptMode.TENT: [ParamGroup.BN_AFFINE],
    AdaptMode.NORM: [],
    AdaptMode.TTT: [ParamGroup.SHARED_BACKBONE, ParamGroup.PRETEXT_HEAD],
}


@dataclass(frozen=True)
class OnlineAdaptConfig:
    """Settings of the online adapters; SGD with momentum, one step per batch"""

    lr: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 64
    episodic: bool = False
    epochs: int = 1
    shift_fraction: float = 0.2
    check_contracts: bool = True

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError(
                f"batch_size and epochs must be >= 1, got {self.batch_size} and {self.epochs}"
            )


@dataclass
class OnlineAdaptState:
    """A model being adapted online, with everything needed to reset or audit it.

    Use ``OnlineAdaptState.create`` so the model is configured for the mode:

    * Tent: batch statistics on, only batch-norm affine parameters trainable
    * Norm: batch statistics on, nothing trainable, no backward pass
    * TTT: source statistics kept, shared backbone and pretext head trainable
    """

    model: AdaptableModel
    mode: AdaptMode
    config: OnlineAdaptConfig
    optimizer: Optional[torch.optim.Optimizer]
    checkpoint: Snapshot
    step: int = 0
    loss_trace: List[float] = field(default_factory=list)

    @property
    def episodic_reset(self) -> bool:
        return self.config.episodic

    @classmethod
    def create(
        cls, model: AdaptableModel, mode: AdaptMode, config: OnlineAdaptConfig = None
    ) -> "OnlineAdaptState":
        mode = AdaptMode(mode)
        config = config or OnlineAdaptConfig()
        if mode in (AdaptMode.TENT, AdaptMode.NORM) and not model.bn_layers():
            raise NoBNLayers(f"{type(model).__name__} has no batch-norm layers to adapt")
        if mode is AdaptMode.TTT and not model.has_pretext_head:
            raise HeadUnavailable(f"TTT needs a pretext head, {type(model).__name__} has none")

        model.eval()
        model.use_batch_stats = mode is not AdaptMode.TTT
        params = model.set_trainable(ALLOWED_UPDATES[mode])
        sizes = model.param_schema().select_by_tag(ALLOWED_UPDATES[mode]).group_sizes()
        LOG.debug("%s updates %s", mode.value, {group.value: n for group, n in sizes.items()})
        optimizer = None
        if mode is not AdaptMode.NORM:
            optimizer = torch.optim.SGD(params, lr=config.lr, momentum=config.momentum)
        return cls(model, mode, config, optimizer, snapshot(model))

    def reset(self):
        """Restore the checkpoint weights and clear optimizer momentum"""
        restore(self.model, self.checkpoint)
        if self.optimizer is not None:
            self.optimizer.state.clear()

    def _finish_step(self, loss: float):
        self.step += 1
        self.loss_trace.append(loss)
        if self.config.check_contracts:
            check_update_contract(self.model, self.checkpoint, ALLOWED_UPDATES[self.mode])
        if self.config.episodic:
            self.reset()


def _check_batch(batch: torch.Tensor):
    if batch.shape[0] < 2:
        raise BatchTooSmall(f"Batch statistics need at least 2 samples, got {batch.shape[0]}")


def tent_step(
    state: OnlineAdaptState, batch: torch.Tensor
) -> Tuple[torch.Tensor, OnlineAdaptState]:
    """One entropy-minimization step on the batch-norm affine parameters

    Predictions come from the same forward pass that the entropy is
    computed on, i.e. before the update.
    """
    _check_batch(batch)
    logits = state.model(batch)
    loss = entropy_loss(logits)
    state.optimizer.zero_grad()
    loss.backward()
    state.optimizer.step()
    predictions = logits.detach().argmax(1)
    state._finish_step(loss.item())
    return predictions, state


def norm_step(
    state: OnlineAdaptState, batch: torch.Tensor
) -> Tuple[torch.Tensor, OnlineAdaptState]:
    """Forward pass normalizing with the statistics of this batch; nothing is updated"""
    _check_batch(batch)
    with torch.no_grad():
        logits = state.model(batch)
    state._finish_step(0.0)
    return logits.argmax(1), state


def ttt_step(
    state: OnlineAdaptState, batch: torch.Tensor
) -> Tuple[torch.Tensor, OnlineAdaptState]:
    """Pretext update of the shared backbone and pretext head, then predict the batch"""
    shifted, shift_labels = make_pretext_batch(batch, state.config.shift_fraction)
    loss = cross_entropy(state.model(shifted, head=Head.PRETEXT), shift_labels)
    state.optimizer.zero_grad()
    loss.backward()
    state.optimizer.step()
    with torch.no_grad():
        predictions = state.model(batch, head=Head.CLASS).argmax(1)
    state._finish_step(loss.item())
    return predictions, state


STEPS: Dict[AdaptMode, Callable] = {
    AdaptMode.TENT: tent_step,
    AdaptMode.NORM: norm_step,
    AdaptMode.TTT: ttt_step,
}


def ttt_online(
    state: OnlineAdaptState, batches: Iterable[torch.Tensor]
) -> Tuple[List[torch.Tensor], OnlineAdaptState]:
    """Adapt on a stream of batches; updates accumulate unless the state is episodic"""
    if state.mode is not AdaptMode.TTT:
        raise ValueError(f"ttt_online needs a TTT state, got {state.mode.value}")
    predictions = []
    for batch in batches:
        batch_predictions, state = ttt_step(state, batch)
        predictions.append(batch_predictions)
    return predictions, state


def iter_batches(x: torch.Tensor, batch_size: int) -> Iterator[torch.Tensor]:
    """Contiguous batches in order; a trailing single sample joins the previous batch"""
    bounds = list(range(0, len(x), batch_size)) + [len(x)]
    if len(bounds) > 2 and bounds[-1] - bounds[-2] == 1:
        bounds.pop(-2)
    for start, stop in zip(bounds[:-1], bounds[1:]):
        yield x[start:stop]


def online_pass(state: OnlineAdaptState, x: torch.Tensor) -> torch.Tensor:
    """One adaptation pass over ``x`` in order, returning the online predictions"""
    step = STEPS[state.mode]
    predictions = []
    for batch in iter_batches(x, state.config.batch_size):
        batch_predictions, state = step(state, batch)
        predictions.append(batch_predictions)
    return torch.cat(predictions)


def multi_epoch_adapt(
    state: OnlineAdaptState, test_x: torch.Tensor, test_y: torch.Tensor, epochs: int = None
) -> List[float]:
    """Repeat the online pass ``epochs`` times, inheriting weights between passes

    Returns
    -------
    List[float]
        Error rate (percent) of the online predictions of every epoch
    """
    epochs = state.config.epochs if epochs is None else epochs
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    errors = []
    for epoch in range(epochs):
        predictions = online_pass(state, test_x)
        errors.append(error_rate(predictions, test_y))
        LOG.info("%s epoch %d: error %.2f%%", state.mode.value, epoch, errors[-1])
    return errors
