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
import logging
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
import torch
from scipy.spatial.distance import cdist

from audiotta.core.errors import EmptyClass

LOG = logging.getLogger("audiotta")


class PseudoLabelSource(Enum):
    PREDICTION = "prediction"
    CENTROID = "centroid"
    REFINED = "refined"


@dataclass(frozen=True, eq=False)
class PseudoLabelSet:
    """Hard pseudo labels for every test sample and the round that produced them"""

    labels: np.ndarray
    num_classes: int
    round: int = 0
    source: PseudoLabelSource = PseudoLabelSource.PREDICTION

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError(f"Pseudo labels must be 1-D, got shape {labels.shape}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ValueError(f"Pseudo labels must be in [0, {self.num_classes})")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "source", PseudoLabelSource(self.source))

    def __len__(self):
        return self.labels.shape[0]

    def as_tensor(self) -> torch.Tensor:
        return torch.from_numpy(self.labels)

    def agreement(self, labels) -> float:
        """Share of samples whose pseudo label equals ``labels``"""
        return float(np.mean(self.labels == np.asarray(labels)))


def _l2_normalize(features: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(features, axis=1, keepdims=True)
    return features / np.maximum(norms, 1e-12)


def _assign(features: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # argmin of cosine distance; ties go to the lowest class id
    distances = cdist(features, centroids, "cosine")
    distances = np.nan_to_num(distances, nan=np.inf)
    return np.argmin(distances, axis=1)


def refine_pseudo_labels(
    features: np.ndarray, probabilities: np.ndarray, rounds: int = 2
) -> PseudoLabelSet:
    """Centroid refinement of model predictions

    Round 0 takes the argmax predictions. Round 1 builds class centroids
    as prediction-weighted means of the (L2-normalized) features and
    relabels every sample by maximum cosine similarity. Later rounds
    rebuild centroids from the hard labels of the previous round. A class
    without samples keeps its previous centroid; refinement stops early at
    a fixed point.

    Parameters
    ----------
    features : np.ndarray
        Penultimate features (m, d)
    probabilities : np.ndarray
        Softmax predictions (m, c)
    rounds : int
        Number of centroid rounds after the initial prediction

    Returns
    -------
    PseudoLabelSet
    """
    features = _l2_normalize(np.asarray(features, dtype=np.float64))
    probabilities = np.asarray(probabilities, dtype=np.float64)
    num_classes = probabilities.shape[1]
    labels = np.argmax(probabilities, axis=1)
    if rounds < 1 or len(labels) == 0:
        return PseudoLabelSet(labels, num_classes)

    mass = probabilities.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        centroids = (probabilities.T @ features) / mass[:, None]
    labels = _assign(features, centroids)
    completed = 1

    for _ in range(1, rounds):
        one_hot = np.eye(num_classes)[labels]
        counts = one_hot.sum(axis=0)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            warnings.warn(
                f"Classes {empty.tolist()} have no samples, keeping their previous centroids",
                EmptyClass,
            )
        filled = counts > 0
        centroids[filled] = (one_hot.T @ features)[filled] / counts[filled, None]
        new_labels = _assign(features, centroids)
        completed += 1
        if np.array_equal(new_labels, labels):
            LOG.debug("Pseudo labels reached a fixed point after %d rounds", completed)
            break
        labels = new_labels

    source = PseudoLabelSource.CENTROID if completed == 1 else PseudoLabelSource.REFINED
    return PseudoLabelSet(labels, num_classes, completed, source)


def generate_pseudo_labels(model, x: torch.Tensor, rounds: int = 2, batch_size: int = 256):
    """Predict ``x`` with ``model`` and refine the predictions with class centroids"""
    features, probabilities = [], []
    was_training = model.training
    model.eval()
    with torch.no_grad():
        for start in range(0, len(x), batch_size):
            batch_features = model.features(x[start : start + batch_size])
            features.append(batch_features)
            probabilities.append(model.classify(batch_features).softmax(dim=1))
    model.train(was_training)
    return refine_pseudo_labels(
        torch.cat(features).numpy(), torch.cat(probabilities).numpy(), rounds
    )
