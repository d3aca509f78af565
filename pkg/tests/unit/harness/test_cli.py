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
import os

import numpy as np
import pandas as pd
import pytest

from audiotta.harness import ExperimentCell, RunRecord
from audiotta.harness.cli import build_parser, main
from audiotta.io.audio import Waveform, read_wav, write_wav
from audiotta.io.manifest import read_manifest
from audiotta.io.records import write_jsonl


def test_parser_defaults():
    args = build_parser().parse_args(["ablate", "--variant", "no_pl"])
    assert args.dataset == "toy"
    assert args.noise == "eb"
    assert args.severity == 3.0
    assert args.config is None

    args = build_parser().parse_args(
        ["corrupt", "--in", "clean", "--noise", "gauss", "--lambda", "0.01", "--out", "x"]
    )
    assert args.lam == 0.01 and args.snr_db is None
    assert args.seed == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["corrupt", "--in", "a", "--noise", "eb", "--out", "x"],
        ["corrupt", "--in", "a", "--noise", "eb", "--snr-db", "3", "--lambda", "0.1", "--out", "x"],
        [
            "corrupt",
            "--in",
            "a",
            "--dataset",
            "toy",
            "--noise",
            "eb",
            "--snr-db",
            "3",
            "--out",
            "x",
        ],
        ["corrupt", "--noise", "eb", "--snr-db", "3", "--out", "x"],
    ],
)
def test_corrupt_argument_groups(argv):
    with pytest.raises(SystemExit):
        build_parser().parse_args(argv)


@pytest.fixture
def clean_dir(tmpdir):
    t = np.arange(8000) / 16000
    for index, path in enumerate(["yes/a.wav", "no/b.wav", "c.wav"]):
        tone = Waveform(0.3 * np.sin(2 * np.pi * (300.0 + 100 * index) * t), 16000)
        write_wav(str(tmpdir.join("clean", path)), tone)
    return str(tmpdir.join("clean"))


@pytest.mark.parametrize("noise", ["dd", "eb", "rt"])
def test_corrupt_directory_at_snr(clean_dir, tmpdir, capsys, noise):
    out = str(tmpdir.join("noisy"))
    argv = ["corrupt", "--in", clean_dir, "--noise", noise, "--snr-db", "10", "--seed", "3"]
    assert main(argv + ["--out", out]) == 0
    assert "Wrote 3 corrupted samples" in capsys.readouterr().out

    manifest = read_manifest(os.path.join(out, "manifest.csv"))
    assert manifest["path"].tolist() == ["c.wav", "no/b.wav", "yes/a.wav"]
    assert manifest["label"].tolist() == ["", "no", "yes"]
    np.testing.assert_allclose(manifest["realized_snr"], 10.0, atol=1e-4)
    for path in manifest["path"]:
        clean = read_wav(os.path.join(clean_dir, path))
        noisy = read_wav(os.path.join(out, path))
        assert len(noisy) == len(clean)
        assert noisy.sample_rate == 16000
        assert not np.array_equal(noisy.samples, clean.samples)

    again = str(tmpdir.join("again"))
    main(argv + ["--out", again])
    pd.testing.assert_frame_equal(read_manifest(os.path.join(again, "manifest.csv")), manifest)


def test_corrupt_directory_with_gaussian_noise(clean_dir, tmpdir):
    out = str(tmpdir.join("noisy"))
    main(["corrupt", "--in", clean_dir, "--noise", "gauss", "--lambda", "0.005", "--out", out])
    manifest = read_manifest(os.path.join(out, "manifest.csv"))
    assert len(manifest) == 3
    assert manifest["realized_snr"].isna().all()
    assert (manifest["noise_offset"] == -1).all()


def test_corrupt_rejects_mismatched_levels(clean_dir, tmpdir):
    out = str(tmpdir.join("noisy"))
    with pytest.raises(SystemExit):
        main(["corrupt", "--in", clean_dir, "--noise", "gauss", "--snr-db", "3", "--out", out])
    with pytest.raises(SystemExit):
        main(["corrupt", "--in", clean_dir, "--noise", "gauss", "--lambda", "2", "--out", out])


def test_corrupt_test_split(tmpdir):
    config = tmpdir.join("grid.toml")
    config.write("[toy]\nnum_classes = 2\nper_class = 10\n")
    out = str(tmpdir.join("split"))
    argv = ["corrupt", "--dataset", "toy", "--noise", "rt", "--snr-db", "3", "--out", out]
    main(argv + ["--config", str(config)])
    manifest = read_manifest(os.path.join(out, "manifest.csv"))
    assert 0 < len(manifest) < 20
    assert set(manifest["label"]) <= {"0", "1"}
    np.testing.assert_allclose(manifest["realized_snr"], 3.0, atol=1e-4)


def test_toygen(tmpdir, capsys):
    out = str(tmpdir.join("toy"))
    assert main(["toygen", "--out", out, "--num-classes", "2", "--per-class", "5"]) == 0
    printed = capsys.readouterr().out.split()
    assert [os.path.basename(p) for p in printed] == ["train.csv", "val.csv", "test.csv"]
    test = pd.read_csv(os.path.join(out, "test.csv"))
    assert len(test) == 2 * 2
    assert os.path.isfile(os.path.join(out, test["path"][0]))


def test_report(tmpdir, capsys):
    records_dir = tmpdir.mkdir("records")
    for method, adapted in (("tent", 20.0), ("norm", 35.0)):
        record = RunRecord(ExperimentCell(method, "toy", "eb", 3), 30.0, adapted)
        write_jsonl(str(records_dir.join(f"{record.cell.key}.jsonl")), [record.to_dict()])

    out = str(tmpdir.join("reports"))
    main(["report", "--layout", "table4", "--records", str(records_dir), "--out", out])
    printed = capsys.readouterr().out.split()
    assert sorted(os.path.basename(p) for p in printed) == ["table4.csv", "table4.txt"]
    table = pd.read_csv(os.path.join(out, "table4.csv"))
    assert table["direction"].tolist() == ["↑", "↓"]


def _mtda_grid(tmpdir, methods='["conmix"]', noises='["eb", "rt"]'):
    config = tmpdir.join("mtda.toml")
    config.write(
        "\n".join(
            [
                "[grid]",
                f"methods = {methods}",
                f"noises = {noises}",
                "snrs = [3]",
                "[paths]",
                f'checkpoint_dir = "{tmpdir.join("checkpoints")}"',
                f'records_dir = "{tmpdir.join("records")}"',
                "[toy]",
                "num_classes = 2",
                "per_class = 10",
                "[training]",
                "epochs = 1",
                "[conmix]",
                "epochs = 1",
                "batch_size = 8",
                "[mtda]",
                "epochs = 1",
                "batch_size = 8",
            ]
        )
    )
    return str(config)


def test_adapt_mtda(tmpdir, capsys):
    assert main(["adapt", "--mtda", "--config", _mtda_grid(tmpdir)]) == 0
    printed = capsys.readouterr().out
    assert "toy seed 0" in printed
    assert "eb-3db" in printed and "rt-3db" in printed
    frame = pd.read_csv(str(tmpdir.join("records", "mtda", "toy-s0.csv")))
    assert frame["domain"].tolist() == ["eb-3db", "rt-3db"]
    for name in ("conmix-toy-eb-3db-s0.ckpt", "conmix-toy-rt-3db-s0.ckpt"):
        assert tmpdir.join("checkpoints", "teachers", name).check(file=1)


def test_adapt_mtda_needs_two_corruptions(tmpdir):
    with pytest.raises(SystemExit, match="at least two corruptions"):
        main(["adapt", "--mtda", "--config", _mtda_grid(tmpdir, noises='["eb"]')])
