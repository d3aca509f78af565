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
from typing import ClassVar, List, Tuple, Union

import torch
from torch import nn
from torch.nn.modules.batchnorm import _BatchNorm

from audiotta.core.errors import HeadUnavailable
from audiotta.models.config import Head, ModelConfig
from audiotta.schema import ModelSchema, ParamGroup, ParamSchema


class AdaptableModel(nn.Module):
    """Classifier whose tensors are tagged with the group they belong to.

    Subclasses implement ``features`` (the penultimate embedding) and own a
    ``class_head`` (and optionally a ``pretext_head``). Tags are derived
    from module types and attribute names:

    * batch-norm weight/bias -> BN_AFFINE, running statistics -> BN_STATS
    * ``class_head.*`` -> CLASS_HEAD, ``pretext_head.*`` -> PRETEXT_HEAD
    * names listed in ``other_params`` -> OTHER
    * everything else -> SHARED_BACKBONE
    """

    other_params: ClassVar[Tuple[str, ...]] = ()

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self._use_batch_stats = False

    def features(self, x: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def classify(self, features: torch.Tensor) -> torch.Tensor:
        return self.class_head(features)

    def pretext(self, features: torch.Tensor) -> torch.Tensor:
        if not self.has_pretext_head:
            raise HeadUnavailable(
                f"{type(self).__name__} has no pretext head, only the class head is available"
            )
        return self.pretext_head(features)

    @property
    def has_pretext_head(self) -> bool:
        return hasattr(self, "pretext_head")

    def forward(self, x: torch.Tensor, head: Union[str, Head] = Head.CLASS) -> torch.Tensor:
        head = Head(head)
        features = self.features(x)
        if head is Head.PRETEXT:
            return self.pretext(features)
        return self.classify(features)

    def bn_layers(self) -> List[_BatchNorm]:
        return [m for m in self.modules() if isinstance(m, _BatchNorm)]

    @property
    def use_batch_stats(self) -> bool:
        """Whether batch-norm layers normalize with the statistics of the current batch.

        Source running statistics are left untouched (neither used nor
        updated) while this is on.
        """
        return self._use_batch_stats

    @use_batch_stats.setter
    def use_batch_stats(self, value: bool):
        self._use_batch_stats = bool(value)
        self._apply_bn_mode()

    def train(self, mode: bool = True):
        super().train(mode)
        self._apply_bn_mode()
        return self

    def _apply_bn_mode(self):
        for layer in self.bn_layers():
            if self._use_batch_stats:
                layer.track_running_stats = False
                layer.train(True)
            else:
                layer.track_running_stats = True
                layer.train(self.training)

    def _param_group(self, name: str, module: nn.Module) -> ParamGroup:
        if isinstance(module, _BatchNorm):
            return ParamGroup.BN_AFFINE
        if name.startswith("class_head."):
            return ParamGroup.CLASS_HEAD
        if name.startswith("pretext_head."):
            return ParamGroup.PRETEXT_HEAD
        if name in self.other_params:
            return ParamGroup.OTHER
        return ParamGroup.SHARED_BACKBONE

    def param_schema(self) -> ModelSchema:
        """Group of every parameter and batch-norm statistic of this model"""
        schemas = []
        for module_name, module in self.named_modules():
            prefix = f"{module_name}." if module_name else ""
            for name, param in module.named_parameters(recurse=False):
                full_name = prefix + name
                schemas.append(
                    ParamSchema(full_name, self._param_group(full_name, module), param.shape)
                )
            if isinstance(module, _BatchNorm):
                for name, buffer in module.named_buffers(recurse=False):
                    schemas.append(
                        ParamSchema(prefix + name, ParamGroup.BN_STATS, buffer.shape, True)
                    )
        return ModelSchema(schemas)

    def named_tensors(self):
        """Parameters and batch-norm buffers, keyed like ``param_schema``"""
        tensors = dict(self.named_parameters())
        tensors.update(
            (name, buffer)
            for name, buffer in self.named_buffers()
            if name.rpartition(".")[2] in ("running_mean", "running_var", "num_batches_tracked")
        )
        return tensors

    def set_trainable(self, groups) -> List[nn.Parameter]:
        """Enable gradients only for the given groups and return those parameters"""
        selected = set(self.param_schema().select_by_tag(groups).names)
        trainable = []
        for name, param in self.named_parameters():
            param.requires_grad_(name in selected)
            if name in selected:
                trainable.append(param)
        return trainable
