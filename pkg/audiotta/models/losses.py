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
import torch
from torch.nn import functional as F

from audiotta.core.errors import LabelOutOfRange


def check_labels(labels: torch.Tensor, num_classes: int):
    if labels.numel() and (int(labels.min()) < 0 or int(labels.max()) >= num_classes):
        raise LabelOutOfRange(
            f"Labels must be in [0, {num_classes}), "
            f"got values in [{int(labels.min())}, {int(labels.max())}]"
        )


def cross_entropy(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Mean cross entropy of softmax(logits) against hard labels"""
    labels = torch.as_tensor(labels, dtype=torch.long, device=logits.device)
    check_labels(labels, logits.shape[-1])
    return F.cross_entropy(logits, labels)


def softmax_entropy(logits: torch.Tensor) -> torch.Tensor:
    """Per-sample entropy of the softmax distribution"""
    log_probs = logits.log_softmax(dim=1)
    return -(log_probs.exp() * log_probs).sum(dim=1)


def entropy_loss(logits: torch.Tensor) -> torch.Tensor:
    """Entropy summed over the batch, between 0 and ``B * ln(c)``"""
    return softmax_entropy(logits).sum()
