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
import pytest

from audiotta.core import errors


@pytest.mark.parametrize(
    "error,builtin",
    [
        (errors.LengthMismatch, ValueError),
        (errors.UnknownNoiseSource, KeyError),
        (errors.DivergedLoss, RuntimeError),
        (errors.NoBNLayers, TypeError),
        (errors.ParameterContractViolation, RuntimeError),
        (errors.MissingDataset, FileNotFoundError),
        (errors.CheckpointMissing, FileNotFoundError),
        (errors.CheckpointMismatch, ValueError),
        (errors.EmptyClass, UserWarning),
        (errors.IncompleteGrid, UserWarning),
    ],
)
def test_errors_subclass_builtins(error, builtin):
    assert issubclass(error, builtin)
