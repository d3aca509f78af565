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
from enum import Enum
from typing import List, Set, Union


class ParamGroup(Enum):
    """Groups that every parameter and batch-norm statistic of a model belongs to"""

    # Trainable weights
    SHARED_BACKBONE = "shared_backbone"
    CLASS_HEAD = "class_head"
    PRETEXT_HEAD = "pretext_head"
    BN_AFFINE = "bn_affine"
    OTHER = "other"

    # Buffers
    BN_STATS = "bn_stats"


BUFFER_GROUPS = {ParamGroup.BN_STATS}


class ParamTagSet:
    """Collection that normalizes parameter-group tags given as strings or enums"""

    def __init__(self, tags: List[Union[str, ParamGroup]] = None):
        if isinstance(tags, ParamTagSet):
            tags = list(tags._tags)
        elif tags is None:
            tags = []
        elif isinstance(tags, (str, ParamGroup)):
            tags = [tags]

        self._tags: Set[ParamGroup] = self._normalize_tags(tags)

    def __iter__(self):
        for tag in self._tags:
            yield tag

    def __len__(self):
        return len(self._tags)

    def __contains__(self, tag):
        return normalize_tag(tag) in self._tags

    def _normalize_tags(self, tags) -> Set[ParamGroup]:
        return {normalize_tag(tag) for tag in tags}

    def __repr__(self) -> str:
        return str(sorted(tag.value for tag in self._tags))


def normalize_tag(tag: Union[str, ParamGroup]) -> ParamGroup:
    if isinstance(tag, ParamGroup):
        return tag
    if isinstance(tag, str) and tag.lower() in ParamGroup._value2member_map_:
        return ParamGroup(tag.lower())
    raise ValueError(
        f"Unknown parameter group {tag!r}. "
        f"Valid groups are {[group.value for group in ParamGroup]}"
    )


ParamTagsType = Union[ParamTagSet, ParamGroup, str, List[Union[ParamGroup, str]]]
