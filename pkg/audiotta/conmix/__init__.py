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
from audiotta.conmix.config import AblationVariant, MtdaConfig, PLVariant, StdaConfig  # noqa: F401
from audiotta.conmix.losses import (  # noqa: F401
    consistency_loss,
    mixup_loss,
    nuclear_norm_loss,
    pseudo_label_loss_ce,
    pseudo_label_loss_nll,
)
from audiotta.conmix.mtda import MtdaResult, TeacherBank, mtda_train  # noqa: F401
from audiotta.conmix.pseudo_labels import (  # noqa: F401
    PseudoLabelSet,
    PseudoLabelSource,
    generate_pseudo_labels,
    refine_pseudo_labels,
)
from audiotta.conmix.stda import StdaResult, stda_adapt  # noqa: F401
