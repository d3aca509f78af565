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
from audiotta.features.augment import (  # noqa: F401
    ShiftClass,
    augment_batch,
    make_pretext_batch,
    strong_augment,
    time_shift,
    weak_augment,
)
from audiotta.features.config import FeatureConfig  # noqa: F401
from audiotta.features.spectrogram import (  # noqa: F401
    SpectrogramFrontend,
    SpectrogramImage,
    extract_batch,
    mel_spectrogram,
    stack_images,
)
