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
import itertools
import logging
import posixpath
import warnings
from enum import Enum
from typing import Iterable, List, Optional, Sequence

import matplotlib
import numpy as np
import pandas as pd

from audiotta.core.errors import IncompleteGrid
from audiotta.harness.experiment import ExperimentCell, RunRecord
from audiotta.io.fs import get_fs
from audiotta.io.records import read_jsonl, read_jsonl_dir

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

LOG = logging.getLogger("audiotta")

DOWN, UP, SAME = "↓", "↑", "="
RECORD_COLUMNS = [
    "key",
    "method",
    "dataset",
    "noise",
    "severity",
    "condition",
    "variant",
    "seed",
    "clean_error",
    "unadapted_error",
    "adapted_error",
    "delta",
]


class Layout(Enum):
    TABLE2 = "table2"  # adapted error per method across datasets and noises
    TABLE4 = "table4"  # adapted vs unadapted with arrows
    FIG_BARS = "fig_bars"  # clean / unadapted / adapted bars
    APPENDIX_CURVES = "appendix_curves"  # per-epoch curves of the ablation variants
    MULTI_EPOCH = "multi_epoch"  # error against adaptation epochs per method


def load_records(root: str, storage_options=None) -> List[RunRecord]:
    """Merge the per-cell record files under ``root``, or read a single ``.jsonl`` file"""
    if root.endswith(".jsonl"):
        rows = read_jsonl(root, storage_options)
    else:
        rows = read_jsonl_dir(root, storage_options)
    return [RunRecord.from_dict(row) for row in rows]


def records_frame(records: Iterable[RunRecord]) -> pd.DataFrame:
    rows = []
    for record in records:
        cell = record.cell
        rows.append(
            {
                "key": cell.key,
                "method": cell.method.value,
                "dataset": cell.dataset.value,
                "noise": cell.noise.value,
                "severity": cell.severity,
                "condition": cell.corruption_spec().label,
                "variant": cell.variant.value if cell.variant else "",
                "seed": cell.seed,
                "clean_error": record.clean_error,
                "unadapted_error": record.unadapted_error,
                "adapted_error": record.adapted_error,
                "delta": record.delta,
            }
        )
    return pd.DataFrame(rows, columns=RECORD_COLUMNS).astype({"clean_error": float})


def arrow(delta: float) -> str:
    """Direction of the error change; down means adaptation lowered the error"""
    if delta < 0:
        return DOWN
    if delta > 0:
        return UP
    return SAME


def missing_cells(
    records: Sequence[RunRecord], expected: Optional[Sequence[ExperimentCell]] = None
) -> List[str]:
    """Keys of the grid cells without a record

    Without ``expected`` the grid is every combination of the methods,
    datasets, conditions, variants and seeds seen in ``records``.
    """
    present = {record.cell.key for record in records}
    if expected is not None:
        return sorted({cell.key for cell in expected} - present)

    frame = records_frame(records)
    missing = []
    axes = ["method", "dataset", "condition", "variant", "seed"]
    combos = itertools.product(*(sorted(frame[axis].unique()) for axis in axes))
    seen = set(frame[axes].itertuples(index=False, name=None))
    for combo in combos:
        if combo not in seen:
            missing.append("-".join(str(part) for part in combo if part != ""))
    return missing


def table2(frame: pd.DataFrame) -> pd.DataFrame:
    """Mean adapted error per method (rows) and dataset/condition (columns)"""
    frame = frame.assign(column=frame["dataset"] + " " + frame["condition"])
    return frame.pivot_table(
        index="method", columns="column", values="adapted_error", aggfunc="mean"
    ).round(2)


def snr_increase(frame: pd.DataFrame) -> pd.DataFrame:
    """Error increase from the highest to the lowest SNR per method, dataset and noise"""
    background = frame[frame["noise"] != "gauss"]
    rows = []
    for (method, dataset, noise), group in background.groupby(["method", "dataset", "noise"]):
        by_snr = group.groupby("severity")["adapted_error"].mean()
        if len(by_snr) < 2:
            continue
        rows.append(
            {
                "method": method,
                "dataset": dataset,
                "noise": noise,
                "high_snr": by_snr.index.max(),
                "low_snr": by_snr.index.min(),
                "increase": round(by_snr[by_snr.index.min()] - by_snr[by_snr.index.max()], 2),
            }
        )
    return pd.DataFrame(
        rows, columns=["method", "dataset", "noise", "high_snr", "low_snr", "increase"]
    )


def table4(frame: pd.DataFrame) -> pd.DataFrame:
    """Unadapted and adapted error side by side, with the delta and its direction"""
    grouped = (
        frame.groupby(["method", "dataset", "condition", "variant"], sort=True)[
            ["unadapted_error", "adapted_error"]
        ]
        .mean()
        .reset_index()
    )
    grouped["delta"] = grouped["adapted_error"] - grouped["unadapted_error"]
    grouped["direction"] = grouped["delta"].map(arrow)
    return grouped


def ablation_curves(records: Iterable[RunRecord]) -> pd.DataFrame:
    """Per-epoch accuracy and pseudo-label loss of every conmix ablation record"""
    rows = []
    for record in records:
        cell = record.cell
        if cell.variant is None:
            continue
        for row in record.epochs:
            rows.append(
                {
                    "dataset": cell.dataset.value,
                    "condition": cell.corruption_spec().label,
                    "variant": cell.variant.value,
                    "seed": cell.seed,
                    "epoch": row["epoch"],
                    "accuracy": None if row.get("error") is None else 100.0 - row["error"],
                    "pl_loss": row.get("pl_loss"),
                }
            )
    columns = ["dataset", "condition", "variant", "seed", "epoch", "accuracy", "pl_loss"]
    return pd.DataFrame(rows, columns=columns).astype({"accuracy": float, "pl_loss": float})


def epoch_curves(records: Iterable[RunRecord]) -> pd.DataFrame:
    rows = []
    for record in records:
        cell = record.cell
        for epoch, error in enumerate(record.epoch_errors):
            rows.append(
                {
                    "method": cell.method.value,
                    "dataset": cell.dataset.value,
                    "condition": cell.corruption_spec().label,
                    "seed": cell.seed,
                    "epoch": epoch,
                    "error": error,
                }
            )
    columns = ["method", "dataset", "condition", "seed", "epoch", "error"]
    return pd.DataFrame(rows, columns=columns).astype({"error": float})


def _write_text(path: str, text: str, storage_options=None):
    fs = get_fs(path, storage_options, for_write=True)
    with fs.open(path, "w") as f:
        f.write(text)


def _write_table(
    table: pd.DataFrame, out_dir: str, name: str, storage_options=None, index=True
) -> List[str]:
    csv_path = posixpath.join(out_dir, f"{name}.csv")
    txt_path = posixpath.join(out_dir, f"{name}.txt")
    fs = get_fs(csv_path, storage_options, for_write=True)
    with fs.open(csv_path, "w") as f:
        table.to_csv(f, index=index, float_format="%.2f")
    text = table.to_string(index=index, float_format="{:.2f}".format)
    _write_text(txt_path, text + "\n", storage_options)
    return [csv_path, txt_path]


def _write_figure(fig, path: str, storage_options=None) -> str:
    fs = get_fs(path, storage_options, for_write=True)
    with fs.open(path, "wb") as f:
        fig.savefig(f, format="png", dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def _fig_bars(frame: pd.DataFrame, out_dir: str, storage_options=None) -> List[str]:
    summary = (
        frame.groupby(["dataset", "condition", "method"])[
            ["clean_error", "unadapted_error", "adapted_error"]
        ]
        .mean()
        .reset_index()
    )
    paths = _write_table(summary, out_dir, "fig_bars", storage_options, index=False)
    for (dataset, condition), group in summary.groupby(["dataset", "condition"]):
        fig, ax = plt.subplots(figsize=(1.5 + 1.2 * len(group), 3.5))
        positions = np.arange(len(group))
        width = 0.27
        for offset, column, label in (
            (-width, "clean_error", "no corruption"),
            (0.0, "unadapted_error", "unadapted"),
            (width, "adapted_error", "adapted"),
        ):
            ax.bar(positions + offset, group[column], width, label=label)
        ax.set_xticks(positions)
        ax.set_xticklabels(group["method"])
        ax.set_ylabel("error rate (%)")
        ax.set_title(f"{dataset} {condition}")
        ax.legend(fontsize="small")
        path = posixpath.join(out_dir, f"bars_{dataset}_{condition}.png")
        paths.append(_write_figure(fig, path, storage_options))
    return paths


def _appendix_curves(records, out_dir: str, storage_options=None) -> List[str]:
    curves = ablation_curves(records)
    paths = _write_table(curves, out_dir, "appendix_curves", storage_options, index=False)
    for (dataset, condition), group in curves.groupby(["dataset", "condition"]):
        fig, (acc_ax, loss_ax) = plt.subplots(1, 2, figsize=(9, 3.5))
        for variant, lines in group.groupby("variant"):
            mean = lines.groupby("epoch")[["accuracy", "pl_loss"]].mean()
            acc_ax.plot(mean.index, mean["accuracy"], marker="o", label=variant)
            if mean["pl_loss"].notna().any():
                loss_ax.plot(mean.index, mean["pl_loss"], marker="o", label=variant)
        acc_ax.set_xlabel("epoch")
        acc_ax.set_ylabel("accuracy (%)")
        loss_ax.set_xlabel("epoch")
        loss_ax.set_ylabel("pseudo-label loss")
        acc_ax.legend(fontsize="small")
        fig.suptitle(f"{dataset} {condition}")
        path = posixpath.join(out_dir, f"curves_{dataset}_{condition}.png")
        paths.append(_write_figure(fig, path, storage_options))
    return paths


def _multi_epoch(records, out_dir: str, storage_options=None) -> List[str]:
    curves = epoch_curves(records)
    paths = _write_table(curves, out_dir, "multi_epoch", storage_options, index=False)
    for (dataset, condition), group in curves.groupby(["dataset", "condition"]):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for method, lines in group.groupby("method"):
            mean = lines.groupby("epoch")["error"].mean()
            ax.plot(mean.index + 1, mean.values, marker="o", label=method)
        ax.set_xlabel("epochs")
        ax.set_ylabel("error rate (%)")
        ax.set_title(f"{dataset} {condition}")
        ax.legend(fontsize="small")
        path = posixpath.join(out_dir, f"epochs_{dataset}_{condition}.png")
        paths.append(_write_figure(fig, path, storage_options))
    return paths


def report(
    records: Sequence[RunRecord],
    layout,
    out_dir: str,
    expected: Optional[Sequence[ExperimentCell]] = None,
    storage_options=None,
) -> List[str]:
    """Write the tables and plots of one layout

    Tables are written as CSV plus aligned text with two decimals, plots as
    PNG files. A grid with missing cells raises an ``IncompleteGrid``
    warning naming them; whatever is present is still reported.

    Returns
    -------
    List[str]
        Paths of the files written
    """
    layout = Layout(layout)
    records = list(records)
    missing = missing_cells(records, expected)
    if missing:
        warnings.warn(
            f"{len(missing)} grid cells have no record: {', '.join(missing)}", IncompleteGrid
        )
    frame = records_frame(records)

    if layout is Layout.TABLE2:
        paths = _write_table(table2(frame), out_dir, "table2", storage_options)
        paths += _write_table(snr_increase(frame), out_dir, "snr_increase", storage_options, False)
    elif layout is Layout.TABLE4:
        paths = _write_table(table4(frame), out_dir, "table4", storage_options, index=False)
    elif layout is Layout.FIG_BARS:
        paths = _fig_bars(frame, out_dir, storage_options)
    elif layout is Layout.APPENDIX_CURVES:
        paths = _appendix_curves(records, out_dir, storage_options)
    else:
        paths = _multi_epoch(records, out_dir, storage_options)
    LOG.info("Wrote %s report: %s", layout.value, ", ".join(paths))
    return paths
