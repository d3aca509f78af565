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
import math

import pytest
import torch
from torch.autograd import gradcheck

from audiotta.conmix import (
    PseudoLabelSet,
    consistency_loss,
    mixup_loss,
    nuclear_norm_loss,
    pseudo_label_loss_ce,
    pseudo_label_loss_nll,
)
from audiotta.core.errors import LabelOutOfRange, WeightLengthMismatch
from audiotta.models.losses import cross_entropy


@pytest.fixture
def logits():
    generator = torch.Generator().manual_seed(0)
    return torch.randn(6, 4, generator=generator, dtype=torch.float64)


@pytest.fixture
def labels():
    return torch.tensor([0, 1, 2, 3, 1, 0])


def test_pseudo_label_ce_is_cross_entropy(logits, labels):
    torch.testing.assert_close(pseudo_label_loss_ce(logits, labels), cross_entropy(logits, labels))
    label_set = PseudoLabelSet(labels.numpy(), num_classes=4)
    torch.testing.assert_close(
        pseudo_label_loss_ce(logits, label_set), cross_entropy(logits, labels)
    )


def test_unweighted_nll_is_scaled_cross_entropy(logits, labels):
    torch.testing.assert_close(
        pseudo_label_loss_nll(logits, labels), cross_entropy(logits, labels) / 4
    )


def test_weighted_nll(logits, labels):
    weights = torch.tensor([1.0, 2.0, 0.5, 0.5], dtype=torch.float64)
    log_probs = logits.log_softmax(1)
    expected = torch.stack(
        [-weights[y] * log_probs[i, y] / weights.sum() for i, y in enumerate(labels.tolist())]
    ).mean()
    torch.testing.assert_close(pseudo_label_loss_nll(logits, labels, weights), expected)


def test_weight_length_must_match_classes(logits, labels):
    with pytest.raises(WeightLengthMismatch, match="4 class weights"):
        pseudo_label_loss_nll(logits, labels, torch.ones(3))


@pytest.mark.parametrize("loss", [pseudo_label_loss_ce, pseudo_label_loss_nll])
def test_pseudo_labels_in_range(loss, logits):
    with pytest.raises(LabelOutOfRange):
        loss(logits, torch.tensor([0, 1, 2, 3, 4, 0]))


def test_nuclear_norm_of_one_hot_predictions():
    one_hot = torch.eye(4, dtype=torch.float64)[[0, 1, 2, 3, 3]]
    assert nuclear_norm_loss(1000 * one_hot).item() == pytest.approx(-math.sqrt(5))
    assert nuclear_norm_loss(one_hot, on_logits=True).item() == pytest.approx(-math.sqrt(5))
    uniform = nuclear_norm_loss(torch.zeros(5, 4))
    assert uniform.item() == pytest.approx(-math.sqrt(5 / 4), rel=1e-6)


def test_consistency_treats_weak_view_as_target(logits):
    weak = torch.randn(6, 4, dtype=torch.float64, requires_grad=True)
    strong = logits.clone().requires_grad_(True)
    consistency_loss(strong, weak.softmax(1)).backward()
    assert weak.grad is None
    assert strong.grad is not None

    targets = torch.tensor([2, 0, 1, 1, 3, 0])
    one_hot = torch.eye(4, dtype=torch.float64)[targets]
    torch.testing.assert_close(consistency_loss(logits, one_hot), cross_entropy(logits, targets))


def test_mixup_loss(logits, labels):
    other = torch.tensor([3, 3, 3, 3, 3, 3])
    torch.testing.assert_close(
        mixup_loss(logits, labels, other, 1.0), cross_entropy(logits, labels)
    )
    torch.testing.assert_close(
        mixup_loss(logits, labels, other, 0.0), cross_entropy(logits, other)
    )
    lam = torch.linspace(0, 1, 6, dtype=torch.float64)
    per_sample = torch.nn.functional.cross_entropy
    expected = (
        lam * per_sample(logits, labels, reduction="none")
        + (1 - lam) * per_sample(logits, other, reduction="none")
    ).mean()
    torch.testing.assert_close(mixup_loss(logits, labels, other, lam), expected)


def test_gradients_match_finite_differences():
    generator = torch.Generator().manual_seed(1)
    weights = torch.tensor([1.0, 2.0, 0.5, 1.5], dtype=torch.float64)
    for _ in range(100):
        z = torch.randn(5, 4, dtype=torch.float64, generator=generator, requires_grad=True)
        y = torch.randint(4, (5,), generator=generator)
        y2 = torch.randint(4, (5,), generator=generator)
        target = torch.rand(5, 4, dtype=torch.float64, generator=generator).softmax(1)
        checks = [
            nuclear_norm_loss,
            lambda z: pseudo_label_loss_ce(z, y),
            lambda z: pseudo_label_loss_nll(z, y, weights),
            lambda z: consistency_loss(z, target),
            lambda z: mixup_loss(z, y, y2, 0.3),
        ]
        for loss in checks:
            assert gradcheck(loss, (z,), eps=1e-6, atol=1e-4)
