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

from audiotta.schema import ParamGroup, ParamTagSet
from audiotta.schema.tags import normalize_tag


def test_tagset_init_normalizes_tags_to_enum():
    tag_set = ParamTagSet(["bn_affine", "CLASS_HEAD"])
    assert ParamGroup.BN_AFFINE in tag_set._tags
    assert ParamGroup.CLASS_HEAD in tag_set._tags


def test_tagset_rejects_unknown_groups():
    with pytest.raises(ValueError) as err:
        ParamTagSet(["bn_affine", "decoder"])

    assert "decoder" in str(err.value)
    assert "shared_backbone" in str(err.value)


def test_tagset_is_iterable():
    origin_tags = ["bn_affine", "bn_stats"]
    tag_set = ParamTagSet(origin_tags)
    for tag in tag_set:
        assert tag.value in origin_tags
    assert len(tag_set) == len(origin_tags)


def test_tagset_repr_is_sorted():
    assert repr(ParamTagSet(["pretext_head", "bn_affine"])) == "['bn_affine', 'pretext_head']"


def test_normalize_tag_passes_enums_through():
    assert normalize_tag(ParamGroup.OTHER) is ParamGroup.OTHER
    assert normalize_tag("Other") is ParamGroup.OTHER
