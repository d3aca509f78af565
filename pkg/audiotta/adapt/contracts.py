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
from typing import Dict, List

import torch

from audiotta.core.errors import ParameterContractViolation
from audiotta.models.base import AdaptableModel
from audiotta.schema import ParamTagSet, ParamTagsType

Snapshot = Dict[str, torch.Tensor]


def snapshot(model: AdaptableModel) -> Snapshot:
    """Copies of every parameter and batch-norm statistic"""
    return {name: tensor.detach().clone() for name, tensor in model.named_tensors().items()}


def changed_tensors(model: AdaptableModel, reference: Snapshot) -> List[str]:
    """Names of tensors that are not bit-identical to ``reference``"""
    return [
        name
        for name, tensor in model.named_tensors().items()
        if not torch.equal(tensor.detach(), reference[name])
    ]


def check_update_contract(model: AdaptableModel, reference: Snapshot, allowed: ParamTagsType):
    """Raise if any tensor outside of the ``allowed`` groups differs from ``reference``

    Raises
    ------
    ParameterContractViolation
        Listing every offending tensor with its group
    """
    allowed = ParamTagSet(allowed)
    frozen = model.param_schema().excluding_by_tag(allowed)
    violations = [schema.key for schema in frozen.select_by_name(changed_tensors(model, reference))]
    if violations:
        raise ParameterContractViolation(
            f"Tensors outside of the allowed groups {allowed} changed: {violations}"
        )


def restore(model: AdaptableModel, reference: Snapshot):
    with torch.no_grad():
        for name, tensor in model.named_tensors().items():
            tensor.copy_(reference[name])
