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
from dataclasses import dataclass
from typing import Dict, Iterable, List, Text, Tuple, Union

from audiotta.schema.tags import (
    BUFFER_GROUPS,
    ParamGroup,
    ParamTagSet,
    ParamTagsType,
    normalize_tag,
)


@dataclass(frozen=True)
class ParamSchema:
    """Metadata of one named tensor of a model (parameter or buffer)."""

    name: Text
    tag: ParamGroup
    shape: Tuple[int, ...] = ()
    is_buffer: bool = False

    def __post_init__(self):
        """Standardize the tag and shape on initialization

        Raises:
            ValueError: If the tag is unknown or does not fit the tensor kind
        """
        tag = normalize_tag(self.tag)
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "shape", tuple(int(dim) for dim in self.shape))

        if self.is_buffer != (tag in BUFFER_GROUPS):
            kind = "buffer" if self.is_buffer else "parameter"
            raise ValueError(f"Tensor {self.name} is a {kind} but is tagged {tag.value}.")

    @property
    def numel(self) -> int:
        total = 1
        for dim in self.shape:
            total *= dim
        return total

    @property
    def key(self) -> str:
        """Name and group joined as ``"<layer path>|<tag>"``"""
        return f"{self.name}|{self.tag.value}"

    def __str__(self) -> str:
        return self.name


class ModelSchema:
    """A collection of parameter schemas describing the tensors of a model."""

    def __init__(self, param_schemas=None):
        param_schemas = param_schemas or {}

        if isinstance(param_schemas, dict):
            self.param_schemas = param_schemas
        elif isinstance(param_schemas, (list, tuple)):
            self.param_schemas = {schema.name: schema for schema in param_schemas}
        else:
            raise TypeError("The `param_schemas` parameter must be a list or dict.")

    @property
    def names(self) -> List[str]:
        return list(self.param_schemas.keys())

    def select_by_tag(self, tags: ParamTagsType) -> "ModelSchema":
        """Select the tensors belonging to any of the given groups

        Parameters
        ----------
        tags : ParamTagsType
            Group or list of groups, as enums or their string values

        Returns
        -------
        ModelSchema
            New object containing only the matching tensors
        """
        tags = ParamTagSet(tags)
        return ModelSchema(
            {name: schema for name, schema in self.param_schemas.items() if schema.tag in tags}
        )

    def excluding_by_tag(self, tags: ParamTagsType) -> "ModelSchema":
        tags = ParamTagSet(tags)
        return ModelSchema(
            {name: schema for name, schema in self.param_schemas.items() if schema.tag not in tags}
        )

    def select_by_name(self, names: Union[str, Iterable[str]]) -> "ModelSchema":
        if isinstance(names, str):
            names = [names]
        return ModelSchema(
            {name: self.param_schemas[name] for name in names if name in self.param_schemas}
        )

    def group_sizes(self) -> Dict[ParamGroup, int]:
        """Number of scalar entries per group"""
        sizes: Dict[ParamGroup, int] = {}
        for schema in self.param_schemas.values():
            sizes[schema.tag] = sizes.get(schema.tag, 0) + schema.numel
        return sizes

    def __getitem__(self, name: str) -> ParamSchema:
        return self.param_schemas[name]

    def __contains__(self, name):
        return name in self.param_schemas

    def __iter__(self):
        return iter(self.param_schemas.values())

    def __len__(self):
        return len(self.param_schemas)

    def __repr__(self):
        return str([schema.key for schema in self.param_schemas.values()])

    def __eq__(self, other):
        if not isinstance(other, ModelSchema) or len(self) != len(other):
            return False
        return self.param_schemas == other.param_schemas

