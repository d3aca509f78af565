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
from audiotta.adapt.contracts import (  # noqa: F401
    changed_tensors,
    check_update_contract,
    snapshot,
)
from audiotta.adapt.online import (  # noqa: F401
    AdaptMode,
    OnlineAdaptConfig,
    OnlineAdaptState,
    iter_batches,
    multi_epoch_adapt,
    norm_step,
    online_pass,
    tent_step,
    ttt_online,
    ttt_step,
)
