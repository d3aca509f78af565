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
import argparse
import logging
import posixpath
import sys
from dataclasses import replace
from typing import List, Optional

from audiotta.conmix.config import AblationVariant
from audiotta.core.utils import Distributed, Serial
from audiotta.corruption import CorruptionSpec, NoiseSource
from audiotta.harness.config import GridConfig
from audiotta.harness.datasets import DatasetId, make_toy_dataset, write_dataset
from audiotta.harness.experiment import ExperimentCell, Method
from audiotta.harness.report import Layout, ablation_curves, load_records, report
from audiotta.harness.runner import (
    corrupt_directory,
    ensure_checkpoints,
    mtda_groups,
    run_cell,
    run_grid,
    run_mtda,
    write_corrupted_split,
)
from audiotta.io.fs import get_fs

LOG = logging.getLogger("audiotta")

DATASETS = [dataset.value for dataset in DatasetId]
NOISES = [source.value for source in NoiseSource]


def _grid(args) -> GridConfig:
    return GridConfig.from_toml(args.config) if args.config else GridConfig()


def _single_cell(args, grid: GridConfig, method, variant=None) -> ExperimentCell:
    return ExperimentCell(
        method,
        args.dataset,
        args.noise,
        args.severity,
        args.seed,
        epochs=grid.epochs,
        variant=variant,
        features=grid.features,
        train=grid.train,
        adapter=grid.adapter,
        stda=grid.stda,
        toy_num_classes=grid.toy_num_classes,
        toy_per_class=grid.toy_per_class,
    )


def pretrain_command(args):
    grid = _grid(args)
    for key, path in ensure_checkpoints(grid.cells(), grid.context).items():
        print(f"{key}: {path}")


def corrupt_command(args):
    try:
        spec = CorruptionSpec(args.noise, snr_db=args.snr_db, lam=args.lam, seed=args.seed)
    except ValueError as exc:
        args.error(str(exc))
    if args.in_dir:
        manifest = corrupt_directory(args.in_dir, spec, args.out, noise_root=args.noise_dir)
    else:
        grid = _grid(args)
        context = grid.context
        if args.noise_dir:
            context = replace(context, noise_root=args.noise_dir)
        args.severity = spec.severity
        # the corrupted set only depends on dataset, noise, severity and seed
        cell = _single_cell(args, grid, Method.TENT)
        manifest = write_corrupted_split(cell, context, args.out)
    print(f"Wrote {len(manifest)} corrupted samples to {args.out}")


def adapt_command(args):
    grid = _grid(args)
    cells = grid.cells()
    if args.mtda:
        _mtda(grid, cells)
        return
    context = Distributed(n_workers=args.workers) if args.workers else Serial()
    with context:
        records = run_grid(cells, grid.context)
    for record in records:
        print(
            f"{record.cell.key}: {record.unadapted_error:.2f} -> {record.adapted_error:.2f}"
        )


def _mtda(grid: GridConfig, cells):
    ensure_checkpoints(cells, grid.context)
    groups = [group for group in mtda_groups(cells) if len(group) > 1]
    if not groups:
        raise SystemExit("--mtda needs conmix cells with at least two corruptions")
    for group in groups:
        frame = run_mtda(group, grid.context, grid.mtda)
        print(f"{group[0].dataset.value} seed {group[0].seed}")
        print(frame.to_string(index=False))


def ablate_command(args):
    grid = _grid(args)
    cell = _single_cell(args, grid, Method.CONMIX, variant=args.variant)
    ensure_checkpoints([cell], grid.context)
    record = run_cell(cell, grid.context)
    curves = ablation_curves([record])
    out = args.out or posixpath.join(grid.report_dir, f"ablation_{cell.key}.csv")
    with get_fs(out, for_write=True).open(out, "w") as f:
        curves.to_csv(f, index=False)
    print(curves.to_string(index=False))


def report_command(args):
    grid = _grid(args)
    records = load_records(args.records or grid.context.records_dir)
    expected = grid.cells() if args.config else None
    for path in report(records, args.layout, args.out or grid.report_dir, expected=expected):
        print(path)


def toygen_command(args):
    spec = make_toy_dataset(args.num_classes, args.per_class, seed=args.seed)
    for path in write_dataset(spec, args.out):
        print(path)


def _add_cell_args(parser, default_noise="eb"):
    parser.add_argument("--dataset", default="toy", choices=DATASETS)
    parser.add_argument("--noise", default=default_noise, choices=NOISES)
    parser.add_argument(
        "--snr",
        "--severity",
        dest="severity",
        type=float,
        default=3.0,
        help="SNR in dB for background noises, noise level for gauss",
    )
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="audio-tta", description="Test-time adaptation of audio classifiers under noise"
    )
    parser.add_argument(
        "--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"]
    )
    commands = parser.add_subparsers(dest="command", required=True)

    pretrain = commands.add_parser("pretrain", help="pre-train the source models of a grid")
    pretrain.set_defaults(func=pretrain_command)

    corrupt = commands.add_parser(
        "corrupt", help="write a corrupted copy of a WAV directory or of a test split"
    )
    source = corrupt.add_mutually_exclusive_group(required=True)
    source.add_argument("--in", dest="in_dir", help="directory of WAV files, any depth")
    source.add_argument("--dataset", choices=DATASETS, help="corrupt the test split instead")
    corrupt.add_argument("--noise", required=True, choices=NOISES)
    level = corrupt.add_mutually_exclusive_group(required=True)
    level.add_argument("--snr-db", type=float, help="SNR for background noises")
    level.add_argument("--lambda", dest="lam", type=float, help="Gaussian noise level")
    corrupt.add_argument("--seed", type=int, default=0)
    corrupt.add_argument(
        "--noise-dir", help="long background recordings, the synthetic bank by default"
    )
    corrupt.add_argument("--out", required=True)
    corrupt.set_defaults(func=corrupt_command, error=corrupt.error)

    adapt = commands.add_parser("adapt", help="run every cell of a grid")
    adapt.add_argument("--workers", type=int, default=0, help="local Dask workers, 0 runs serially")
    adapt.add_argument(
        "--mtda",
        action="store_true",
        help="distill the conmix teachers of each dataset and seed into one student",
    )
    adapt.set_defaults(func=adapt_command)

    ablate = commands.add_parser("ablate", help="run one conmix ablation variant")
    ablate.add_argument("--variant", required=True, choices=[v.value for v in AblationVariant])
    _add_cell_args(ablate, default_noise="eb")
    ablate.add_argument("--out", help="per-epoch CSV, defaults to the report directory")
    ablate.set_defaults(func=ablate_command)

    report_parser = commands.add_parser("report", help="tables and plots from run records")
    report_parser.add_argument(
        "--layout", required=True, choices=[layout.value for layout in Layout]
    )
    report_parser.add_argument("--records", help="record directory, defaults to the grid's")
    report_parser.add_argument("--out", help="output directory, defaults to the grid's")
    report_parser.set_defaults(func=report_command)

    toygen = commands.add_parser("toygen", help="write the synthetic dataset as WAV files")
    toygen.add_argument("--out", required=True)
    toygen.add_argument("--num-classes", type=int, default=10)
    toygen.add_argument("--per-class", type=int, default=50)
    toygen.add_argument("--seed", type=int, default=0)
    toygen.set_defaults(func=toygen_command)

    for sub in (pretrain, corrupt, adapt, ablate, report_parser):
        sub.add_argument("--config", help="grid TOML file")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
