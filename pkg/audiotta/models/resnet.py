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
from torch.nn import functional as F

from audiotta.models.base import AdaptableModel
from audiotta.models.config import ModelConfig, ModelFamily


class ResidualBlock(nn.Module):
    def __init__(self, in_channels: int, out_channels: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, stride, 1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_channels)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, 1, 1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_channels)
        self.shortcut = nn.Sequential()
        if stride != 1 or in_channels != out_channels:
            self.shortcut = nn.Sequential(
                nn.Conv2d(in_channels, out_channels, 1, stride, bias=False),
                nn.BatchNorm2d(out_channels),
            )

    def forward(self, x):
        out = F.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return F.relu(out + self.shortcut(x))


class ResNetBackbone(nn.Module):
    """Stem plus ``num_stages`` stages of ``blocks_per_stage`` residual blocks.

    Frequency is pooled away while ``time_bins`` coarse time positions are
    kept, so the embedding still knows where in the clip energy sits.
    """

    def __init__(self, width: int, num_stages: int, blocks_per_stage: int, time_bins: int):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv2d(1, width, 3, 2, 1, bias=False),
            nn.BatchNorm2d(width),
            nn.ReLU(),
        )
        blocks = []
        channels = width
        for stage in range(num_stages):
            out_channels = width * 2**stage
            for index in range(blocks_per_stage):
                stride = 2 if stage > 0 and index == 0 else 1
                blocks.append(ResidualBlock(channels, out_channels, stride))
                channels = out_channels
        self.blocks = nn.Sequential(*blocks)
        self.pool = nn.AdaptiveAvgPool2d((1, time_bins))
        self.out_dim = channels * time_bins

    def forward(self, x):
        return torch.flatten(self.pool(self.blocks(self.stem(x))), 1)


class BNResNet(AdaptableModel):
    """Batch-norm residual classifier adapted by Tent and Norm"""

    def __init__(self, config: ModelConfig):
        super().__init__(config)
        self.backbone = ResNetBackbone(
            config.width, config.num_stages, config.depth, config.time_bins
        )
        self.class_head = nn.Linear(self.backbone.out_dim, config.num_classes)

    def features(self, x):
        return self.backbone(x)


class DualHeadResNet(BNResNet):
    """Residual backbone shared by a class head and a time-shift pretext head"""

    def __init__(self, config: ModelConfig):
        super().__init__(config)
        self.pretext_head = nn.Linear(self.backbone.out_dim, config.num_shift_classes)


FAMILY_MODELS = {
    ModelFamily.BN_RESNET: BNResNet,
    ModelFamily.DUAL_HEAD_RESNET: DualHeadResNet,
}
