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
import pytest

from audiotta.conmix import StdaConfig
from audiotta.harness import ExperimentCell, RunContext, pretrain, run_cell
from audiotta.models import ModelConfig
from audiotta.models.training import TrainConfig

pytestmark = pytest.mark.slow

SEEDS = range(20)
VARIANTS = ("org", "upd", "no_pl", "no_cst", "no_nm")


def ablation_cell(variant, seed):
    return ExperimentCell(
        "conmix",
        "toy",
        "eb",
        3,
        seed,
        variant=variant,
        model=ModelConfig("gn_transformer", width=16, depth=2),
        train=TrainConfig(epochs=20, batch_size=32, lr=0.02),
        stda=StdaConfig(epochs=5, batch_size=32),
        toy_num_classes=10,
        toy_per_class=200,
    )


@pytest.fixture(scope="module")
def ablation_records(tmpdir_factory):
    root = tmpdir_factory.mktemp("ablation")
    context = RunContext(checkpoint_dir=str(root.join("checkpoints")))
    records = {}
    for seed in SEEDS:
        pretrain(ablation_cell("upd", seed), context)
        for variant in VARIANTS:
            records[variant, seed] = run_cell(ablation_cell(variant, seed), context, persist=False)
    return records


def pl_losses(record):
    return [row["pl_loss"] for row in record.epochs]


def test_modified_stda_beats_no_adaptation(ablation_records):
    upd = [ablation_records["upd", seed] for seed in SEEDS]
    successes = sum(record.adapted_error < record.unadapted_error for record in upd)
    assert successes >= 18


def test_dropping_the_nuclear_norm_is_worst(ablation_records):
    successes = 0
    for seed in SEEDS:
        errors = {variant: ablation_records[variant, seed].adapted_error for variant in VARIANTS}
        successes += errors["no_nm"] == max(errors.values())
    assert successes >= 18


def test_pseudo_label_loss_converges_only_with_nll(ablation_records):
    successes = 0
    for seed in SEEDS:
        upd = pl_losses(ablation_records["upd", seed])
        org = pl_losses(ablation_records["org", seed])
        converges = all(later <= earlier for earlier, later in zip(upd, upd[1:]))
        successes += converges and org[-1] > org[0]
    assert successes >= 15


def test_ablations_without_pseudo_labels_have_no_trace(ablation_records):
    for seed in SEEDS:
        assert all(loss is None for loss in pl_losses(ablation_records["no_pl", seed]))
