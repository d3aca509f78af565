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
from enum import Enum
from typing import Optional, Union

from audiotta.core.errors import LambdaOutOfRange, UnknownNoiseSource


class NoiseSource(Enum):
    """Kinds of corruption applied to clean test audio"""

    DD = "dd"  # doing the dishes
    EB = "eb"  # exercise bike
    RT = "rt"  # running tap
    GAUSSIAN = "gauss"

    @property
    def is_background(self) -> bool:
        return self is not NoiseSource.GAUSSIAN

    @classmethod
    def parse(cls, value: Union[str, "NoiseSource"]) -> "NoiseSource":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as err:
            raise UnknownNoiseSource(
                f"Unknown noise source {value!r}, expected one of {[s.value for s in cls]}"
            ) from err


@dataclass(frozen=True)
class CorruptionSpec:
    """How a test set is corrupted.

    Background noises (DD, EB, RT) are mixed at ``snr_db``; the Gaussian
    shift adds ``lam`` times standard-normal noise. Exactly one of the two
    severities is set, matching ``noise_source``.
    """

    noise_source: NoiseSource
    snr_db: Optional[float] = None
    lam: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        source = NoiseSource.parse(self.noise_source)
        object.__setattr__(self, "noise_source", source)

        if source.is_background:
            if self.snr_db is None or self.lam is not None:
                raise ValueError(
                    f"{source.value} noise needs snr_db (and no lam), "
                    f"got snr_db={self.snr_db} lam={self.lam}"
                )
            object.__setattr__(self, "snr_db", float(self.snr_db))
        else:
            if self.lam is None or self.snr_db is not None:
                raise ValueError(
                    f"Gaussian shift needs lam (and no snr_db), "
                    f"got snr_db={self.snr_db} lam={self.lam}"
                )
            if not 0.0 <= float(self.lam) <= 1.0:
                raise LambdaOutOfRange(f"lam must be in [0, 1], got {self.lam}")
            object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def severity(self) -> float:
        return self.snr_db if self.noise_source.is_background else self.lam

    @property
    def label(self) -> str:
        if self.noise_source.is_background:
            return f"{self.noise_source.value}-{self.snr_db:g}db"
        return f"{self.noise_source.value}-{self.lam:g}"
