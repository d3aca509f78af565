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
import json
import logging
import posixpath
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from audiotta.core.errors import LabelVocabularyMismatch, MissingDataset
from audiotta.io.audio import Waveform, read_wav, write_wav
from audiotta.io.fs import get_fs

LOG = logging.getLogger("audiotta")

SPLITS = ("train", "val", "test")
DIGIT_WORDS = ("zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine")
SPLIT_COLUMNS = ["path", "label", "label_id"]


class DatasetId(Enum):
    AM = "am"  # AudioMNIST
    SC = "sc"  # SpeechCommands V1
    SCR = "scr"  # SpeechCommands, random 63/7/30 split of the training pool
    SCN = "scn"  # SpeechCommands digits
    TOY = "toy"


NUM_CLASSES = {DatasetId.AM: 10, DatasetId.SC: 30, DatasetId.SCR: 30, DatasetId.SCN: 10}
SAMPLE_RATES = {
    DatasetId.AM: 48000,
    DatasetId.SC: 16000,
    DatasetId.SCR: 16000,
    DatasetId.SCN: 16000,
    DatasetId.TOY: 16000,
}


@dataclass
class DatasetSpec:
    """A dataset with its train/val/test split manifests.

    Manifests are DataFrames with ``path`` (relative to ``root``), ``label``
    and ``label_id`` columns. The TOY dataset keeps its waveforms in memory
    in ``waveforms`` instead of reading files.
    """

    id: DatasetId
    root: Optional[str]
    splits: Dict[str, pd.DataFrame]
    num_classes: int
    sample_rate: int
    waveforms: Dict[str, List[Waveform]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.id = DatasetId(self.id)
        seen = {}
        for name, manifest in self.splits.items():
            for path in manifest["path"]:
                if path in seen:
                    raise ValueError(f"{path} is in both the {seen[path]} and {name} splits")
                seen[path] = name
        labels = set()
        for manifest in self.splits.values():
            labels.update(manifest["label_id"].tolist())
        if labels and (len(labels) > self.num_classes or max(labels) >= self.num_classes):
            raise LabelVocabularyMismatch(
                f"{self.id.value} expects {self.num_classes} classes, "
                f"manifests hold label ids {sorted(labels)}"
            )

    def split_sizes(self) -> Dict[str, int]:
        return {name: len(manifest) for name, manifest in self.splits.items()}


def _manifest(paths: List[str], labels: List[str], vocabulary: List[str]) -> pd.DataFrame:
    label_ids = {label: index for index, label in enumerate(vocabulary)}
    return pd.DataFrame(
        {"path": paths, "label": labels, "label_id": [label_ids[label] for label in labels]},
        columns=SPLIT_COLUMNS,
    )


def _check_vocabulary(dataset: DatasetId, vocabulary: List[str]):
    expected = NUM_CLASSES[dataset]
    if len(vocabulary) != expected:
        raise LabelVocabularyMismatch(
            f"{dataset.value} expects {expected} classes, found {len(vocabulary)}: {vocabulary}"
        )


def _read_list(fs, path: str) -> List[str]:
    if not fs.exists(path):
        raise MissingDataset(f"Split list {path} not found")
    with fs.open(path, "r") as f:
        return [line.strip() for line in f if line.strip()]


def _speech_commands(root: str, storage_options=None) -> Tuple[Dict[str, pd.DataFrame], List[str]]:
    fs = get_fs(root, storage_options)
    root = root.rstrip("/")
    files = sorted(
        posixpath.relpath(path, fs._strip_protocol(root))
        for path in fs.glob(f"{root}/*/*.wav")
    )
    files = [path for path in files if not path.startswith("_")]
    if not files:
        raise MissingDataset(f"No SpeechCommands recordings found under {root}")
    validation = set(_read_list(fs, f"{root}/validation_list.txt"))
    testing = set(_read_list(fs, f"{root}/testing_list.txt"))
    vocabulary = sorted({path.split("/")[0] for path in files})

    assigned = {"train": [], "val": [], "test": []}
    for path in files:
        split = "test" if path in testing else "val" if path in validation else "train"
        assigned[split].append(path)
    splits = {
        name: _manifest(paths, [p.split("/")[0] for p in paths], vocabulary)
        for name, paths in assigned.items()
    }
    return splits, vocabulary


def _random_split(
    manifest: pd.DataFrame, rng: np.random.Generator, fractions=(0.63, 0.07, 0.30)
) -> Dict[str, pd.DataFrame]:
    order = rng.permutation(len(manifest))
    n_train = int(round(fractions[0] * len(manifest)))
    n_test = int(round(fractions[2] * len(manifest)))
    n_val = len(manifest) - n_train - n_test
    bounds = {"train": (0, n_train), "val": (n_train, n_train + n_val)}
    bounds["test"] = (n_train + n_val, len(manifest))
    return {
        name: manifest.iloc[order[start:stop]].reset_index(drop=True)
        for name, (start, stop) in bounds.items()
    }


AM_FILE = re.compile(r"(?P<digit>\d)_(?P<speaker>\d+)_(?P<index>\d+)\.wav$")


def _audio_mnist(root: str, storage_options=None) -> Dict[str, pd.DataFrame]:
    fs = get_fs(root, storage_options)
    root = root.rstrip("/")
    stripped = fs._strip_protocol(root)
    files = sorted(posixpath.relpath(path, stripped) for path in fs.glob(f"{root}/*/*.wav"))
    if not files:
        raise MissingDataset(f"No AudioMNIST recordings found under {root}")

    meta_path = f"{root}/audioMNIST_meta.txt"
    if fs.exists(meta_path):
        with fs.open(meta_path, "r") as f:
            meta = json.load(f)
        german = {
            int(speaker)
            for speaker, info in meta.items()
            if "german" in str(info.get("accent", "")).lower()
        }
        is_train = lambda speaker: speaker in german  # noqa: E731
    else:
        warnings.warn(
            f"{meta_path} not found, falling back to speakers 1-40 for training "
            "and 41-60 for testing instead of the accent split"
        )
        is_train = lambda speaker: speaker <= 40  # noqa: E731

    assigned = {"train": [], "val": [], "test": []}
    labels = {"train": [], "val": [], "test": []}
    for path in files:
        match = AM_FILE.search(path)
        if match is None:
            continue
        split = "train" if is_train(int(match["speaker"])) else "test"
        assigned[split].append(path)
        labels[split].append(match["digit"])
    vocabulary = [str(digit) for digit in range(10)]
    return {name: _manifest(assigned[name], labels[name], vocabulary) for name in SPLITS}


def build_splits(
    dataset, root: Optional[str] = None, seed: int = 0, storage_options=None, **toy_kwargs
) -> DatasetSpec:
    """Split manifests of one of the supported datasets

    * SC: the published validation and testing lists; everything else trains
    * SCR: a seeded 63/7/30 train/val/test split of the SC training pool
    * SCN: SC restricted to the ten digit words
    * AM: German-accent speakers train, every other speaker tests
    * TOY: generated in memory by ``make_toy_dataset``

    Raises
    ------
    MissingDataset
        If the dataset directory or its split lists are missing
    LabelVocabularyMismatch
        If the labels found do not match the expected class count
    """
    dataset = DatasetId(dataset)
    if dataset is DatasetId.TOY:
        return make_toy_dataset(seed=seed, **toy_kwargs)
    if root is None or not get_fs(root, storage_options).exists(root):
        raise MissingDataset(f"{dataset.value} dataset directory {root} does not exist")

    if dataset is DatasetId.AM:
        splits = _audio_mnist(root, storage_options)
    else:
        splits, vocabulary = _speech_commands(root, storage_options)
        if dataset is DatasetId.SCN:
            vocabulary = list(DIGIT_WORDS)
            splits = {
                name: _manifest(
                    manifest.loc[manifest["label"].isin(DIGIT_WORDS), "path"].tolist(),
                    manifest.loc[manifest["label"].isin(DIGIT_WORDS), "label"].tolist(),
                    vocabulary,
                )
                for name, manifest in splits.items()
            }
        _check_vocabulary(dataset, vocabulary)
        if dataset is DatasetId.SCR:
            splits = _random_split(splits["train"], np.random.default_rng(seed))

    spec = DatasetSpec(dataset, root, splits, NUM_CLASSES[dataset], SAMPLE_RATES[dataset])
    LOG.info("%s splits: %s", dataset.value, spec.split_sizes())
    return spec


def toy_waveform(
    label: int, rng: np.random.Generator, sample_rate: int = 16000, duration_s: float = 1.0
) -> Waveform:
    """One toy utterance: a harmonic tone burst whose fundamental encodes the class"""
    num_samples = int(round(duration_s * sample_rate))
    t = np.arange(num_samples) / sample_rate
    fundamental = (200.0 + 150.0 * label) * rng.uniform(0.98, 1.02)
    tone = np.zeros(num_samples)
    for harmonic, amplitude in ((1, 1.0), (2, 0.5), (3, 0.25)):
        if harmonic * fundamental < sample_rate / 2:
            phase = rng.uniform(0, 2 * np.pi)
            tone += amplitude * np.sin(2 * np.pi * harmonic * fundamental * t + phase)

    # Hann-shaped burst around the middle of the clip
    burst_length = int(0.4 * num_samples)
    center = int((0.5 + rng.uniform(-0.03, 0.03)) * num_samples)
    start = max(0, center - burst_length // 2)
    envelope = np.zeros(num_samples)
    window = np.hanning(burst_length)[: num_samples - start]
    envelope[start : start + len(window)] = window

    samples = rng.uniform(0.4, 0.6) * envelope * tone / 1.75
    return Waveform(samples + 0.01 * rng.standard_normal(num_samples), sample_rate)


def make_toy_dataset(
    num_classes: int = 10,
    per_class: int = 50,
    seed: int = 0,
    sample_rate: int = 16000,
    duration_s: float = 1.0,
    fractions: Tuple[float, float, float] = (0.6, 0.1, 0.3),
) -> DatasetSpec:
    """Synthetic, linearly separable stand-in for a keyword dataset

    Class ``k`` is a tone burst with fundamental ``200 + 150 k`` Hz plus
    two harmonics over a faint noise floor. Every class is split
    ``fractions`` into train/val/test.
    """
    if num_classes < 2:
        raise ValueError(f"num_classes must be at least 2, got {num_classes}")
    if 200.0 + 150.0 * (num_classes - 1) >= 0.49 * sample_rate:
        raise ValueError(f"{num_classes} classes do not fit below Nyquist at {sample_rate} Hz")

    rng = np.random.default_rng(seed)
    n_train = int(round(fractions[0] * per_class))
    n_val = int(round(fractions[1] * per_class))
    waveforms = {name: [] for name in SPLITS}
    rows = {name: [] for name in SPLITS}
    for label in range(num_classes):
        for index in range(per_class):
            split = "train" if index < n_train else "val" if index < n_train + n_val else "test"
            waveforms[split].append(toy_waveform(label, rng, sample_rate, duration_s))
            rows[split].append((f"{split}/{label}/{index}.wav", str(label), label))

    splits = {name: pd.DataFrame(rows[name], columns=SPLIT_COLUMNS) for name in SPLITS}
    return DatasetSpec(DatasetId.TOY, None, splits, num_classes, sample_rate, waveforms)


def load_split(
    spec: DatasetSpec, split: str, duration_s: float = 1.0, storage_options=None
) -> Tuple[List[Waveform], np.ndarray]:
    """Waveforms (padded or trimmed to ``duration_s``) and label ids of one split"""
    manifest = spec.splits[split]
    labels = manifest["label_id"].to_numpy(dtype=np.int64)
    if spec.waveforms:
        return list(spec.waveforms[split]), labels
    num_samples = int(round(duration_s * spec.sample_rate))
    waveforms = []
    for path in manifest["path"]:
        waveform = read_wav(posixpath.join(spec.root, path), storage_options)
        if waveform.sample_rate != spec.sample_rate:
            raise ValueError(
                f"{path} is sampled at {waveform.sample_rate} Hz, expected {spec.sample_rate} Hz"
            )
        waveforms.append(waveform.fit_length(num_samples))
    return waveforms, labels


def write_dataset(spec: DatasetSpec, out_dir: str, storage_options=None) -> List[str]:
    """Write an in-memory dataset as WAV files plus one ``<split>.csv`` manifest per split"""
    if not spec.waveforms:
        raise ValueError(f"{spec.id.value} is read from {spec.root}, there is nothing to write")
    manifests = []
    for split, manifest in spec.splits.items():
        for path, waveform in zip(manifest["path"], spec.waveforms[split]):
            write_wav(posixpath.join(out_dir, path), waveform, storage_options=storage_options)
        manifest_path = posixpath.join(out_dir, f"{split}.csv")
        with get_fs(manifest_path, storage_options, for_write=True).open(manifest_path, "w") as f:
            manifest.to_csv(f, index=False)
        manifests.append(manifest_path)
    return manifests
