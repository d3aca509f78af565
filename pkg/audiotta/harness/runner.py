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
import time
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import torch
from torch.utils.data import TensorDataset

from audiotta.adapt.online import OnlineAdaptState, multi_epoch_adapt
from audiotta.conmix.config import MtdaConfig
from audiotta.conmix.mtda import TeacherBank, mtda_train
from audiotta.conmix.stda import stda_adapt
from audiotta.core.errors import FewerThanTwoDomains, MissingDataset
from audiotta.core.utils import config_hash, derive_seed, provenance, run_all_on_workers
from audiotta.corruption import (
    CorruptionSpec,
    NoiseSource,
    corrupt_set_with_details,
    load_noise_bank,
    make_toy_noise_bank,
)
from audiotta.corruption.noise_bank import NoiseBank
from audiotta.features.spectrogram import SpectrogramImage, extract_batch, stack_images
from audiotta.harness.datasets import DatasetId, DatasetSpec, build_splits, load_split
from audiotta.harness.experiment import ExperimentCell, Method, RunRecord
from audiotta.io.cache import SpectrogramCache
from audiotta.io.audio import read_wav, write_wav
from audiotta.io.checkpoint import load_checkpoint, read_checkpoint_header, save_checkpoint
from audiotta.io.fs import get_fs
from audiotta.io.manifest import MANIFEST_COLUMNS, write_manifest
from audiotta.io.records import write_jsonl
from audiotta.models import AdaptableModel, ModelFamily, build_model
from audiotta.models.training import error_rate, predict, pretrain_classifier, pretrain_ttt

LOG = logging.getLogger("audiotta")


@dataclass(frozen=True)
class RunContext:
    """Where a grid reads its inputs and writes its outputs.

    ``data_roots`` maps dataset ids to corpus directories; TOY needs none.
    Without a ``noise_root`` the synthetic noise bank is used. With a
    ``cache_dir`` the spectrograms of the clean splits are cached on disk.
    """

    data_roots: Dict[str, str] = field(default_factory=dict)
    noise_root: Optional[str] = None
    checkpoint_dir: str = "checkpoints"
    records_dir: str = "records"
    cache_dir: Optional[str] = None
    storage_options: Optional[dict] = None


def load_dataset(cell: ExperimentCell, context: RunContext) -> DatasetSpec:
    return build_splits(
        cell.dataset,
        root=context.data_roots.get(cell.dataset.value),
        seed=cell.seeds["split"],
        storage_options=context.storage_options,
        **(
            {"num_classes": cell.toy_num_classes, "per_class": cell.toy_per_class}
            if cell.dataset is DatasetId.TOY
            else {}
        ),
    )


def load_noise(context: RunContext, sample_rate: int) -> NoiseBank:
    if context.noise_root is None:
        return make_toy_noise_bank(sample_rate=sample_rate)
    return load_noise_bank(context.noise_root, context.storage_options)


def spectrograms(waveforms, cell: ExperimentCell, sample_rate: int) -> torch.Tensor:
    return extract_batch(waveforms, cell.features.for_sample_rate(sample_rate))


def _dataset_key(cell: ExperimentCell) -> str:
    if cell.dataset is DatasetId.TOY:
        return f"toy-{cell.toy_num_classes}x{cell.toy_per_class}-{cell.seeds['split']}"
    return cell.dataset.value


def clean_spectrograms(
    cell: ExperimentCell, spec: DatasetSpec, split: str, context: RunContext
) -> Tuple[torch.Tensor, np.ndarray]:
    """Spectrograms and labels of a clean split, read through the cache when one is configured"""
    waveforms, labels = load_split(spec, split, storage_options=context.storage_options)
    if context.cache_dir is None:
        return spectrograms(waveforms, cell, spec.sample_rate), labels

    config = cell.features.for_sample_rate(spec.sample_rate)
    cache = SpectrogramCache(context.cache_dir, config, context.storage_options)
    keys = [f"{_dataset_key(cell)}/{path}" for path in spec.splits[split]["path"]]
    missing = [index for index, key in enumerate(keys) if key not in cache]
    if missing:
        LOG.info("Computing %d of %d %s spectrograms", len(missing), len(keys), split)
        computed = extract_batch([waveforms[index] for index in missing], config)
        for index, image in zip(missing, computed):
            cache.put(keys[index], SpectrogramImage(image[0].numpy()))
        cache.flush()
    return stack_images([cache.get(key) for key in keys]), labels


def checkpoint_path(cell: ExperimentCell, context: RunContext) -> str:
    return posixpath.join(context.checkpoint_dir, f"{cell.pretrain_key()}.ckpt")


def pretrain(cell: ExperimentCell, context: RunContext, overwrite: bool = False) -> str:
    """Train the source model ``cell`` adapts and save it as a checkpoint

    Dual-head models are trained jointly on the class and time-shift
    tasks; every other family on the class task alone. An existing
    checkpoint is kept unless ``overwrite`` is set.

    Returns
    -------
    str
        Path of the checkpoint
    """
    path = checkpoint_path(cell, context)
    if not overwrite and get_fs(path, context.storage_options).exists(path):
        header = read_checkpoint_header(path, context.storage_options)
        LOG.info("Reusing %s checkpoint %s", header["family"], path)
        return path

    spec = load_dataset(cell, context)
    x, labels = clean_spectrograms(cell, spec, "train", context)
    train_set = TensorDataset(x, torch.from_numpy(labels))
    train_config = cell.train_config()
    model = build_model(cell.model_config(spec.num_classes), seed=train_config.seed)
    LOG.info("Pre-training %s on %s", model.config.family.value, spec.id.value)
    if model.config.family is ModelFamily.DUAL_HEAD_RESNET:
        result = pretrain_ttt(model, train_set, train_config)
    else:
        result = pretrain_classifier(model, train_set, train_config)

    save_checkpoint(
        result.model,
        path,
        metadata={"dataset": spec.id.value, "train": train_config, "history": result.history},
        storage_options=context.storage_options,
    )
    return path


def ensure_checkpoints(cells: Iterable[ExperimentCell], context: RunContext) -> Dict[str, str]:
    """Pre-train every distinct source model the cells need, once each"""
    unique = {}
    for cell in cells:
        unique.setdefault(cell.pretrain_key(), cell)
    return {key: pretrain(cell, context) for key, cell in unique.items()}


def load_source_model(cell: ExperimentCell, spec: DatasetSpec, context: RunContext):
    model, _ = load_checkpoint(
        checkpoint_path(cell, context),
        expected_config=cell.model_config(spec.num_classes),
        storage_options=context.storage_options,
    )
    return model


def evaluate(model: AdaptableModel, x: torch.Tensor, y) -> float:
    model.eval()
    return error_rate(predict(model, x), y)


def corrupted_test_set(
    cell: ExperimentCell, spec: DatasetSpec, context: RunContext
) -> Tuple[List, np.ndarray, pd.DataFrame]:
    waveforms, labels = load_split(spec, "test", storage_options=context.storage_options)
    noise_bank = load_noise(context, spec.sample_rate) if cell.noise.is_background else None
    corrupted, details = corrupt_set_with_details(waveforms, cell.corruption_spec(), noise_bank)
    return corrupted, labels, details


def evaluate_clean(
    cell: ExperimentCell,
    context: RunContext,
    spec: Optional[DatasetSpec] = None,
    model: Optional[AdaptableModel] = None,
) -> float:
    """Error of the frozen source model on the uncorrupted test split

    ``spec`` and ``model`` are loaded for the cell unless given.
    """
    if spec is None:
        spec = load_dataset(cell, context)
    if model is None:
        model = load_source_model(cell, spec, context)
    return evaluate(model, *clean_spectrograms(cell, spec, "test", context))


def _online_epochs(state: OnlineAdaptState, errors: List[float]) -> List[dict]:
    steps = np.array_split(np.asarray(state.loss_trace, dtype=float), len(errors))
    return [
        {"epoch": epoch, "error": error, "loss": float(chunk.mean()) if len(chunk) else 0.0}
        for epoch, (error, chunk) in enumerate(zip(errors, steps))
    ]


def adapt(cell: ExperimentCell, model: AdaptableModel, x: torch.Tensor, y: np.ndarray):
    """Run the cell's method on ``x``.

    Returns
    -------
    Tuple[float, List[dict], List[float]]
        Adapted error rate, one row per epoch and the per-step losses
    """
    labels = torch.from_numpy(y)
    if cell.method is Method.CONMIX:
        result = stda_adapt(
            model, x, cell.stda_config(), test_y=labels, feature_config=cell.features
        )
        epochs = [
            {key: None if pd.isna(value) else value for key, value in row.items()}
            for row in result.epochs.to_dict("records")
        ]
        return result.final_error, epochs, result.steps["total_loss"].tolist()

    state = OnlineAdaptState.create(model, cell.method.adapt_mode, cell.adapter_config())
    errors = multi_epoch_adapt(state, x, labels)
    return errors[-1], _online_epochs(state, errors), list(state.loss_trace)


def record_path(cell: ExperimentCell, context: RunContext) -> str:
    return posixpath.join(context.records_dir, f"{cell.key}.jsonl")


def run_cell(cell: ExperimentCell, context: RunContext = None, persist: bool = True) -> RunRecord:
    """Corrupt, evaluate, adapt and re-evaluate one grid cell

    The unadapted and adapted error rates are measured on the same
    corrupted test set. The record is written to its own file under
    ``context.records_dir`` unless ``persist`` is off.

    Raises
    ------
    CheckpointMissing
        If the source model has not been pre-trained
    """
    context = context or RunContext()
    LOG.info("Running cell %s", cell.key)
    start = time.perf_counter()
    try:
        spec = load_dataset(cell, context)
        model = load_source_model(cell, spec, context)
        corrupted, labels, _ = corrupted_test_set(cell, spec, context)
        x = spectrograms(corrupted, cell, spec.sample_rate)
        unadapted = evaluate(model, x, labels)

        clean_error = evaluate_clean(cell, context, spec, model)

        adapted, epochs, step_losses = adapt(cell, model, x, labels)
    except Exception:
        LOG.exception("Cell %s failed", cell.key)
        raise

    record = RunRecord(
        cell=cell,
        unadapted_error=unadapted,
        adapted_error=adapted,
        clean_error=clean_error,
        epochs=epochs,
        step_losses=step_losses,
        seeds=cell.seeds,
        config_hash=config_hash(cell),
        provenance=provenance(),
        wall_clock=time.perf_counter() - start,
        num_test=len(labels),
    )
    LOG.info(
        "Cell %s: error %.2f%% -> %.2f%% (clean %.2f%%)",
        cell.key,
        unadapted,
        adapted,
        clean_error,
    )
    if persist:
        write_jsonl(
            record_path(cell, context), [record.to_dict()], storage_options=context.storage_options
        )
    return record


def teacher_path(cell: ExperimentCell, context: RunContext) -> str:
    return posixpath.join(context.checkpoint_dir, "teachers", f"{cell.key}.ckpt")


def mtda_path(cell: ExperimentCell, context: RunContext) -> str:
    return posixpath.join(context.records_dir, "mtda", f"{cell.dataset.value}-s{cell.seed}.csv")


def mtda_groups(cells: Iterable[ExperimentCell]) -> List[List[ExperimentCell]]:
    """Conmix cells that differ only in their corruption, as target-domain groups"""
    groups: Dict[tuple, List[ExperimentCell]] = {}
    for cell in cells:
        if cell.method is Method.CONMIX:
            key = (cell.dataset.value, cell.seed, cell.variant, cell.epochs)
            groups.setdefault(key, []).append(cell)
    return list(groups.values())


def run_mtda(
    cells: Sequence[ExperimentCell],
    context: RunContext = None,
    config: MtdaConfig = None,
    persist: bool = True,
) -> pd.DataFrame:
    """Distill the single-target teachers of several corruptions into one student

    Every cell is one target domain: a conmix cell of the same dataset and
    seed with its own noise and severity. Each teacher is the source model
    adapted to its domain with the cell's own settings; teacher checkpoints
    are kept under ``checkpoint_dir/teachers`` and reused when present.

    Returns
    -------
    pd.DataFrame
        One row per domain with the error of the source model, its teacher
        and the student, written as CSV under ``records_dir/mtda`` unless
        ``persist`` is off

    Raises
    ------
    FewerThanTwoDomains
        If fewer than two cells are given
    """
    context = context or RunContext()
    cells = list(cells)
    if len(cells) < 2:
        raise FewerThanTwoDomains(f"Need at least two target domains, got {len(cells)}")
    methods = sorted({cell.method.value for cell in cells})
    if methods != [Method.CONMIX.value]:
        raise ValueError(f"Teachers are adapted with conmix, got {methods}")
    if len({(cell.dataset, cell.seed) for cell in cells}) > 1:
        raise ValueError("Every target domain must come from the same dataset and seed")

    first = cells[0]
    spec = load_dataset(first, context)
    source = load_source_model(first, spec, context)
    target_sets, labels = {}, {}
    for cell in cells:
        corrupted, y, _ = corrupted_test_set(cell, spec, context)
        target_sets[cell.key] = spectrograms(corrupted, cell, spec.sample_rate)
        labels[cell.key] = y

    paths = {cell.key: teacher_path(cell, context) for cell in cells}
    for cell in cells:
        path = paths[cell.key]
        if get_fs(path, context.storage_options).exists(path):
            LOG.info("Reusing teacher %s", path)
            continue
        adapted = TeacherBank.from_stda(
            source, {cell.key: target_sets[cell.key]}, cell.stda_config()
        )
        save_checkpoint(
            adapted[cell.key],
            path,
            metadata={"cell": cell.to_dict()},
            storage_options=context.storage_options,
        )
    teachers = TeacherBank.from_checkpoints(paths, context.storage_options)

    config = replace(config or MtdaConfig(), seed=derive_seed(first.seed, "mtda"))
    student = mtda_train(teachers, target_sets, config).student

    rows = []
    for cell in cells:
        x, y = target_sets[cell.key], labels[cell.key]
        rows.append(
            {
                "domain": cell.corruption_spec().label,
                "unadapted_error": evaluate(source, x, y),
                "teacher_error": evaluate(teachers[cell.key], x, y),
                "student_error": evaluate(student, x, y),
            }
        )
    frame = pd.DataFrame(rows)
    LOG.info("MTDA on %s:\n%s", spec.id.value, frame.to_string(index=False))
    if persist:
        path = mtda_path(first, context)
        with get_fs(path, context.storage_options, for_write=True).open(path, "w") as f:
            frame.to_csv(f, index=False)
    return frame


def build_grid(
    methods: Sequence,
    datasets: Sequence,
    noises: Sequence,
    snrs: Sequence[float] = (3.0, 10.0),
    lambdas: Sequence[float] = (0.005,),
    seeds: Sequence[int] = (0,),
    variants: Sequence = (None,),
    **cell_kwargs,
) -> List[ExperimentCell]:
    """Every (method, dataset, noise, severity, seed) combination as a cell

    Background noises take their severities from ``snrs`` and the Gaussian
    shift from ``lambdas``. Ablation ``variants`` only multiply conmix cells.
    """
    cells = []
    for method, dataset, noise, seed in itertools.product(methods, datasets, noises, seeds):
        severities = snrs if NoiseSource.parse(noise).is_background else lambdas
        method_variants = variants if Method(method) is Method.CONMIX else (None,)
        for severity, variant in itertools.product(severities, method_variants):
            cell = ExperimentCell(
                method, dataset, noise, severity, seed, variant=variant, **cell_kwargs
            )
            cells.append(cell)

    keys = [cell.key for cell in cells]
    duplicates = sorted({key for key in keys if keys.count(key) > 1})
    if duplicates:
        raise ValueError(f"Grid has duplicate cells: {duplicates}")
    return cells


def run_grid(cells: Sequence[ExperimentCell], context: RunContext = None) -> List[RunRecord]:
    """Pre-train what is missing, then run every cell, in parallel under a Dask client"""
    context = context or RunContext()
    ensure_checkpoints(cells, context)
    return run_all_on_workers(run_cell, cells, desc="cells", context=context)


def _write_corrupted(out_dir, paths, waveforms, labels, details, storage_options=None):
    for path, waveform in zip(paths, waveforms):
        write_wav(posixpath.join(out_dir, path), waveform, storage_options=storage_options)
    manifest = pd.DataFrame(
        {
            "path": paths,
            "label": labels,
            "noise_offset": details["noise_offset"],
            "realized_snr": details["realized_snr"],
        },
        columns=MANIFEST_COLUMNS,
    )
    write_manifest(posixpath.join(out_dir, "manifest.csv"), manifest, storage_options)
    return manifest


def write_corrupted_split(cell: ExperimentCell, context: RunContext, out_dir: str) -> pd.DataFrame:
    """Write the corrupted test split of a cell as WAV files plus a manifest"""
    spec = load_dataset(cell, context)
    corrupted, labels, details = corrupted_test_set(cell, spec, context)
    paths = [f"{label}/{index:06d}.wav" for index, label in enumerate(labels)]
    return _write_corrupted(out_dir, paths, corrupted, labels, details, context.storage_options)


def corrupt_directory(
    in_dir: str,
    spec: CorruptionSpec,
    out_dir: str,
    noise_root: Optional[str] = None,
    storage_options=None,
) -> pd.DataFrame:
    """Corrupt every WAV file under ``in_dir``, keeping its relative layout under ``out_dir``

    The label of a file is the name of its top-level folder, empty for files
    directly under ``in_dir``. Files are corrupted in sorted path order, so a
    given spec always produces the same output.
    """
    fs = get_fs(in_dir, storage_options)
    in_dir = in_dir.rstrip("/")
    stripped = fs._strip_protocol(in_dir)
    found = set(fs.glob(f"{in_dir}/*.wav")) | set(fs.glob(f"{in_dir}/**/*.wav"))
    paths = sorted(posixpath.relpath(path, stripped) for path in found)
    if not paths:
        raise MissingDataset(f"No WAV files found under {in_dir}")
    waveforms = [
        read_wav(posixpath.join(in_dir, path), storage_options=storage_options) for path in paths
    ]
    noise_bank = None
    if spec.noise_source.is_background:
        rate = waveforms[0].sample_rate
        noise_bank = (
            make_toy_noise_bank(sample_rate=rate)
            if noise_root is None
            else load_noise_bank(noise_root, storage_options)
        )
    corrupted, details = corrupt_set_with_details(waveforms, spec, noise_bank)
    labels = [path.split("/")[0] if "/" in path else "" for path in paths]
    LOG.info("Corrupted %d files from %s with %s", len(paths), in_dir, spec.label)
    return _write_corrupted(out_dir, paths, corrupted, labels, details, storage_options)
