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
"""Named errors raised across audiotta.

Each error subclasses the builtin exception that a caller would otherwise
expect for the same situation, so ``except ValueError`` keeps working.
"""


# corruption
class LengthMismatch(ValueError):
    """Clean and noise waveforms differ in length or sample rate"""


class ZeroEnergyNoise(ValueError):
    """Noise has zero energy so it cannot be scaled to a target SNR"""


class ZeroEnergySignal(ValueError):
    """Clean signal has zero energy so the SNR is undefined"""


class ClipTooLong(ValueError):
    """Requested clip is longer than the source recording"""


class LambdaOutOfRange(ValueError):
    """Gaussian shift level outside of [0, 1]"""


class UnknownNoiseSource(KeyError):
    """Noise source is not a known kind or is missing from the noise bank"""


# features
class TooShort(ValueError):
    """Waveform is shorter than a single analysis window"""


# models
class HeadUnavailable(ValueError):
    """The requested output head does not exist on this model family"""


class LabelOutOfRange(ValueError):
    """A class label is outside of [0, num_classes)"""


class DivergedLoss(RuntimeError):
    """Training produced a non-finite loss"""


# adapters
class NoBNLayers(TypeError):
    """Batch-norm based adaptation on a model without batch-norm layers"""


class BatchTooSmall(ValueError):
    """Batch statistics need at least two samples"""


class ParameterContractViolation(RuntimeError):
    """An adapter changed tensors outside of the groups it is allowed to update"""


# conmix
class WeightLengthMismatch(ValueError):
    """Per-class weights do not match the number of classes"""


class AllLossesDisabled(ValueError):
    """Every component of the composite adaptation loss is switched off"""


class FewerThanTwoDomains(ValueError):
    """Multi-target distillation needs at least two target domains"""


class EmptyClass(UserWarning):
    """A class received no samples during centroid refinement"""


# harness
class MissingDataset(FileNotFoundError):
    """Dataset root or one of its required files does not exist"""


class LabelVocabularyMismatch(ValueError):
    """The labels found on disk do not match the expected class count"""


class CheckpointMissing(FileNotFoundError):
    """No pre-trained checkpoint exists for the requested model"""


class CheckpointMismatch(ValueError):
    """Checkpoint header does not match the expected configuration"""


class IncompleteGrid(UserWarning):
    """Records do not cover every cell of the requested report grid"""
