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
import torch

from audiotta.core.errors import HeadUnavailable
from audiotta.models import Head, ModelFamily
from audiotta.schema import ParamGroup
from tests.conftest import small_model


@pytest.mark.parametrize("family", list(ModelFamily))
def test_class_head_shape(family, spectrogram_batch):
    model = small_model(family, num_classes=5)
    with torch.no_grad():
        assert model(spectrogram_batch).shape == (8, 5)
        assert model(spectrogram_batch, head="class").shape == (8, 5)


def test_pretext_head_shape(spectrogram_batch):
    model = small_model("dual_head_resnet")
    assert model.has_pretext_head
    with torch.no_grad():
        assert model(spectrogram_batch, head=Head.PRETEXT).shape == (8, 3)


@pytest.mark.parametrize("family", ["bn_resnet", "gn_transformer"])
def test_missing_pretext_head(family, spectrogram_batch):
    model = small_model(family)
    assert not model.has_pretext_head
    with pytest.raises(HeadUnavailable):
        model(spectrogram_batch, head=Head.PRETEXT)


@pytest.mark.parametrize("family", list(ModelFamily))
def test_tags_partition_every_tensor(family):
    model = small_model(family)
    schema = model.param_schema()
    assert sorted(schema.names) == sorted(model.named_tensors())
    assert sum(len(schema.select_by_tag(tag)) for tag in ParamGroup) == len(schema)
    assert set(schema.excluding_by_tag("bn_stats").names) == {
        name for name, _ in model.named_parameters()
    }


def test_group_membership():
    bn = small_model("bn_resnet").param_schema()
    groups = set(bn.group_sizes())
    assert {ParamGroup.SHARED_BACKBONE, ParamGroup.CLASS_HEAD, ParamGroup.BN_AFFINE} <= groups
    assert "backbone.stem.1.weight" in bn.select_by_tag("bn_affine")
    assert "backbone.stem.1.running_mean" in bn.select_by_tag("bn_stats")
    assert "class_head.weight" in bn.select_by_tag("class_head")
    assert not bn.select_by_tag("pretext_head")

    dual = small_model("dual_head_resnet").param_schema()
    assert dual.select_by_tag("pretext_head").names == ["pretext_head.weight", "pretext_head.bias"]

    transformer = small_model("gn_transformer").param_schema()
    assert not transformer.select_by_tag(["bn_affine", "bn_stats"])
    assert sorted(transformer.select_by_tag("other").names) == ["cls_token", "pos_embedding"]


def test_set_trainable_only_enables_groups():
    model = small_model("dual_head_resnet")
    params = model.set_trainable(["shared_backbone", "pretext_head"])
    schema = model.param_schema()
    allowed = set(schema.select_by_tag(["shared_backbone", "pretext_head"]).names)
    assert len(params) == len(allowed)
    for name, param in model.named_parameters():
        assert param.requires_grad == (name in allowed)


def test_batch_stats_leave_source_statistics_untouched(spectrogram_batch):
    model = small_model("bn_resnet")
    before = {name: t.clone() for name, t in model.named_tensors().items()}
    model.use_batch_stats = True
    assert all(layer.training for layer in model.bn_layers())
    with torch.no_grad():
        model(spectrogram_batch)
    for name, tensor in model.named_tensors().items():
        assert torch.equal(tensor, before[name])

    model.use_batch_stats = False
    model.eval()
    assert not any(layer.training for layer in model.bn_layers())


def test_batch_stats_change_predictions(spectrogram_batch):
    model = small_model("bn_resnet")
    with torch.no_grad():
        source = model(spectrogram_batch * 3 + 1)
        model.use_batch_stats = True
        batch = model(spectrogram_batch * 3 + 1)
    assert not torch.allclose(source, batch)


def test_build_model_is_seeded_and_keeps_global_rng():
    state = torch.random.get_rng_state()
    first = small_model("gn_transformer", seed=3)
    second = small_model("gn_transformer", seed=3)
    assert torch.equal(torch.random.get_rng_state(), state)
    for name, tensor in first.named_tensors().items():
        assert torch.equal(tensor, second.named_tensors()[name])
    assert not first.training
