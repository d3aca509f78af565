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
import posixpath

import numpy as np
import pandas as pd
import pytest

from audiotta.core.errors import LabelVocabularyMismatch, MissingDataset
from audiotta.harness.datasets import (
    DIGIT_WORDS,
    DatasetId,
    build_splits,
    load_split,
    make_toy_dataset,
    write_dataset,
)
from audiotta.io.audio import Waveform, write_wav

OTHER_WORDS = [
    "bed", "bird", "cat", "dog", "down", "go", "happy", "house", "left", "marvin",
    "no", "off", "on", "right", "sheila", "stop", "tree", "up", "wow", "yes",
]  # fmt: skip


def _clip(sample_rate=16000):
    return Waveform(0.1 * np.ones(sample_rate // 10), sample_rate)


@pytest.fixture
def speech_commands(tmpdir):
    root = str(tmpdir.mkdir("speech_commands"))
    testing, validation = [], []
    for word in list(DIGIT_WORDS) + OTHER_WORDS:
        for index in range(4):
            write_wav(posixpath.join(root, word, f"s{index}.wav"), _clip())
        testing.append(f"{word}/s0.wav")
        validation.append(f"{word}/s1.wav")
    write_wav(posixpath.join(root, "_background_noise_", "hum.wav"), _clip())
    with open(posixpath.join(root, "testing_list.txt"), "w") as f:
        f.write("\n".join(testing) + "\n")
    with open(posixpath.join(root, "validation_list.txt"), "w") as f:
        f.write("\n".join(validation) + "\n")
    return root


def test_toy_dataset_sizes():
    spec = make_toy_dataset(num_classes=3, per_class=10, seed=0)
    assert spec.id is DatasetId.TOY
    assert spec.split_sizes() == {"train": 18, "val": 3, "test": 9}
    for split in ("train", "val", "test"):
        manifest = spec.splits[split]
        assert list(manifest.columns) == ["path", "label", "label_id"]
        assert manifest["label_id"].value_counts().tolist() == [len(manifest) // 3] * 3
        assert all(len(w) == 16000 for w in spec.waveforms[split])


def test_toy_dataset_is_seeded():
    first = make_toy_dataset(num_classes=2, per_class=5, seed=4)
    second = make_toy_dataset(num_classes=2, per_class=5, seed=4)
    other = make_toy_dataset(num_classes=2, per_class=5, seed=5)
    assert first.waveforms["test"] == second.waveforms["test"]
    assert first.waveforms["test"] != other.waveforms["test"]


def test_toy_dataset_validation():
    with pytest.raises(ValueError, match="at least 2"):
        make_toy_dataset(num_classes=1)
    with pytest.raises(ValueError, match="Nyquist"):
        make_toy_dataset(num_classes=60)


def test_load_toy_split(toy_dataset):
    waveforms, labels = load_split(toy_dataset, "test")
    assert len(waveforms) == len(labels) == 24
    assert labels.dtype == np.int64
    assert sorted(set(labels.tolist())) == [0, 1, 2, 3]


def test_write_toy_dataset(tmpdir):
    spec = make_toy_dataset(num_classes=2, per_class=5, seed=0)
    out = str(tmpdir)
    manifests = write_dataset(spec, out)
    assert [posixpath.basename(m) for m in manifests] == ["train.csv", "val.csv", "test.csv"]
    written = pd.read_csv(posixpath.join(out, "test.csv"))
    assert written["path"].tolist() == spec.splits["test"]["path"].tolist()
    assert tmpdir.join(written["path"][0]).check(file=True)


def test_speech_commands_lists(speech_commands):
    spec = build_splits("sc", speech_commands)
    assert spec.num_classes == 30
    assert spec.split_sizes() == {"train": 60, "val": 30, "test": 30}
    assert "_background_noise_/hum.wav" not in set(pd.concat(spec.splits.values())["path"])
    assert set(spec.splits["test"]["path"].str.rpartition("/")[2]) == {"s0.wav"}

    waveforms, labels = load_split(spec, "test")
    assert len(waveforms) == 30
    assert all(len(w) == 16000 for w in waveforms)


def test_speech_commands_digits(speech_commands):
    spec = build_splits("scn", speech_commands)
    assert spec.num_classes == 10
    for manifest in spec.splits.values():
        assert set(manifest["label"]) == set(DIGIT_WORDS)
    assert spec.split_sizes() == {"train": 20, "val": 10, "test": 10}


def test_speech_commands_random_split(speech_commands):
    spec = build_splits("scr", speech_commands, seed=0)
    sizes = spec.split_sizes()
    assert sum(sizes.values()) == 60
    assert sizes == {"train": round(0.63 * 60), "val": 60 - 38 - 18, "test": 18}
    again = build_splits("scr", speech_commands, seed=0)
    assert again.splits["test"]["path"].tolist() == spec.splits["test"]["path"].tolist()


def test_missing_dataset(tmpdir):
    with pytest.raises(MissingDataset):
        build_splits("sc", str(tmpdir.join("nothing")))
    with pytest.raises(MissingDataset):
        build_splits("am")


def test_wrong_vocabulary(tmpdir):
    root = str(tmpdir)
    for word in DIGIT_WORDS[:3]:
        write_wav(posixpath.join(root, word, "a.wav"), _clip())
    for name in ("testing_list.txt", "validation_list.txt"):
        tmpdir.join(name).write("")
    with pytest.raises(LabelVocabularyMismatch, match="expects 30"):
        build_splits("sc", root)


def test_audio_mnist_accent_split(tmpdir):
    root = str(tmpdir)
    for speaker in (1, 2, 3):
        for digit in range(10):
            write_wav(
                posixpath.join(root, f"{speaker:02d}", f"{digit}_{speaker:02d}_0.wav"),
                _clip(48000),
            )
    meta = {"01": {"accent": "German"}, "02": {"accent": "Spanish"}, "03": {"accent": "german"}}
    tmpdir.join("audioMNIST_meta.txt").write(json.dumps(meta))

    spec = build_splits("am", root)
    assert spec.sample_rate == 48000
    assert spec.split_sizes() == {"train": 20, "val": 0, "test": 10}
    assert set(spec.splits["test"]["path"].str.slice(0, 2)) == {"02"}


def test_audio_mnist_without_meta_warns(tmpdir):
    root = str(tmpdir)
    for speaker in (5, 45):
        write_wav(posixpath.join(root, str(speaker), f"3_{speaker}_0.wav"), _clip(48000))
    with pytest.warns(UserWarning, match="speakers 1-40"):
        spec = build_splits("am", root)
    assert spec.split_sizes()["train"] == 1
    assert spec.split_sizes()["test"] == 1
