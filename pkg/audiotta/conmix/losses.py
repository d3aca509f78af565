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
from typing import Optional, Sequence, Union

import torch
from torch.nn import functional as F

from audiotta.conmix.pseudo_labels import PseudoLabelSet
from audiotta.core.errors import WeightLengthMismatch
from audiotta.models.losses import check_labels, cross_entropy

Labels = Union[PseudoLabelSet, torch.Tensor, Sequence[int]]


def _label_tensor(labels: Labels, device=None) -> torch.Tensor:
    if isinstance(labels, PseudoLabelSet):
        labels = labels.as_tensor()
    return torch.as_tensor(labels, dtype=torch.long, device=device)


def nuclear_norm_loss(logits: torch.Tensor, on_logits: bool = False) -> torch.Tensor:
    """Negative Frobenius norm of the (B, c) prediction matrix.

    Uses ``sqrt(sum(p_ij ** 2))`` of the softmax outputs, or of the raw
    logits when ``on_logits`` is set. A batch of one-hot rows scores ``-sqrt(B)``.
    """
    predictions = logits if on_logits else logits.softmax(dim=1)
    return -torch.sqrt((predictions**2).sum())


def pseudo_label_loss_ce(logits: torch.Tensor, pseudo_labels: Labels) -> torch.Tensor:
    """Cross entropy of the softmax outputs against hard pseudo labels"""
    return cross_entropy(logits, _label_tensor(pseudo_labels, logits.device))


def pseudo_label_loss_nll(
    logits: torch.Tensor, pseudo_labels: Labels, weights: Optional[torch.Tensor] = None
) -> torch.Tensor:
    """Weighted negative log-likelihood on log-softmax outputs

    Parameters
    ----------
    logits : torch.Tensor
        Batch of logits (B, c)
    pseudo_labels : PseudoLabelSet or tensor
        Hard labels for the batch
    weights : torch.Tensor, optional
        Per-class weights, all ones by default

    Returns
    -------
    torch.Tensor
        Batch mean of ``-w_y * log_softmax(logits)_y / sum(w)``. With all-ones
        weights this is the cross entropy divided by ``c``.
    """
    num_classes = logits.shape[1]
    labels = _label_tensor(pseudo_labels, logits.device)
    check_labels(labels, num_classes)
    if weights is None:
        weights = torch.ones(num_classes, dtype=logits.dtype, device=logits.device)
    weights = torch.as_tensor(weights, dtype=logits.dtype, device=logits.device)
    if weights.shape != (num_classes,):
        raise WeightLengthMismatch(
            f"Expected {num_classes} class weights, got shape {tuple(weights.shape)}"
        )
    log_probs = logits.log_softmax(dim=1)
    per_sample = -weights[labels] * log_probs.gather(1, labels[:, None])[:, 0]
    return (per_sample / weights.sum()).mean()


def consistency_loss(logits_strong: torch.Tensor, probs_weak: torch.Tensor) -> torch.Tensor:
    """Cross entropy of strong-view predictions against detached weak-view probabilities"""
    return -(probs_weak.detach() * logits_strong.log_softmax(dim=1)).sum(dim=1).mean()


def mixup_loss(
    logits: torch.Tensor,
    labels_i: torch.Tensor,
    labels_j: torch.Tensor,
    lam: Union[float, torch.Tensor],
) -> torch.Tensor:
    """``lam * CE(logits, y_i) + (1 - lam) * CE(logits, y_j)``, averaged over the batch"""
    num_classes = logits.shape[1]
    labels_i = _label_tensor(labels_i, logits.device)
    labels_j = _label_tensor(labels_j, logits.device)
    check_labels(labels_i, num_classes)
    check_labels(labels_j, num_classes)
    lam = torch.as_tensor(lam, dtype=logits.dtype, device=logits.device)
    loss_i = F.cross_entropy(logits, labels_i, reduction="none")
    loss_j = F.cross_entropy(logits, labels_j, reduction="none")
    return (lam * loss_i + (1 - lam) * loss_j).mean()
