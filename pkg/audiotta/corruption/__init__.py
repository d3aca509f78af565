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
from audiotta.corruption.mixing import (  # noqa: F401
    corrupt_set,
    corrupt_set_with_details,
    gaussian_shift,
    mix_noise,
    noise_scale,
    random_clip,
    realized_snr,
)
from audiotta.corruption.noise_bank import (  # noqa: F401
    NoiseBank,
    load_noise_bank,
    make_toy_noise_bank,
    resample,
)
from audiotta.corruption.spec import CorruptionSpec, NoiseSource  # noqa: F401
