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
from torch import nn

from audiotta.models.base import AdaptableModel
from audiotta.models.config import ModelConfig


class GNTransformer(AdaptableModel):
    """Attention classifier without batch normalization.

    A two-layer convolutional embedding with GroupNorm turns the spectrogram
    into a ``token_grid`` of tokens; a class token and learned positions
    are added and the sequence runs through pre-norm encoder blocks.
    """

    other_params = ("cls_token", "pos_embedding")

    def __init__(self, config: ModelConfig):
        super().__init__(config)
        width, dim = config.width, config.embed_dim
        self.embedding = nn.Sequential(
            nn.Conv2d(1, width, 3, 2, 1),
            nn.GroupNorm(config.groups, width),
            nn.GELU(),
            nn.Conv2d(width, dim, 3, 2, 1),
            nn.GroupNorm(config.groups, dim),
            nn.GELU(),
            nn.AdaptiveAvgPool2d(config.token_grid),
        )
        num_tokens = config.token_grid[0] * config.token_grid[1]
        self.cls_token = nn.Parameter(torch.zeros(1, 1, dim))
        self.pos_embedding = nn.Parameter(0.02 * torch.randn(1, num_tokens + 1, dim))
        self.blocks = nn.ModuleList(
            nn.TransformerEncoderLayer(
                dim,
                config.attention_heads,
                dim_feedforward=2 * dim,
                dropout=0.0,
                activation="gelu",
                batch_first=True,
                norm_first=True,
            )
            for _ in range(config.depth)
        )
        self.norm = nn.LayerNorm(dim)
        self.class_head = nn.Linear(dim, config.num_classes)

    def features(self, x):
        tokens = self.embedding(x).flatten(2).transpose(1, 2)
        cls_token = self.cls_token.expand(tokens.shape[0], -1, -1)
        hidden = torch.cat([cls_token, tokens], dim=1) + self.pos_embedding
        for block in self.blocks:
            hidden = block(hidden)
        return self.norm(hidden[:, 0])
