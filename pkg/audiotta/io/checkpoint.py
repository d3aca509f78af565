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
from typing import Optional, Tuple

import torch

from audiotta.core.compat import torch_load_kwargs
from audiotta.core.errors import CheckpointMismatch, CheckpointMissing
from audiotta.core.utils import config_hash, to_jsonable
from audiotta.io.fs import get_fs
from audiotta.models import AdaptableModel, ModelConfig, build_model

FORMAT_VERSION = 1


def save_checkpoint(model: AdaptableModel, path: str, metadata: dict = None, storage_options=None):
    """Write a model as a single-file container.

    The container holds a header (format version, config hash, family and
    model config) and one array per tensor keyed ``"<layer path>|<group>"``.
    """
    schema = model.param_schema()
    arrays = {
        schema[name].key: tensor.detach().cpu().clone()
        for name, tensor in model.named_tensors().items()
    }
    header = {
        "format_version": FORMAT_VERSION,
        "config_hash": config_hash(model.config),
        "family": model.config.family.value,
        "model_config": json.dumps(to_jsonable(model.config), sort_keys=True),
        "metadata": json.dumps(to_jsonable(metadata or {}), sort_keys=True),
    }
    fs = get_fs(path, storage_options, for_write=True)
    with fs.open(path, "wb") as f:
        torch.save({"header": header, "arrays": arrays}, f)


def read_checkpoint_header(path: str, storage_options=None) -> dict:
    header, _ = _read(path, storage_options)
    return header


def _read(path: str, storage_options=None) -> Tuple[dict, dict]:
    fs = get_fs(path, storage_options)
    if not fs.exists(path):
        raise CheckpointMissing(f"No checkpoint at {path}")
    with fs.open(path, "rb") as f:
        payload = torch.load(f, map_location="cpu", **torch_load_kwargs())
    header = payload["header"]
    if header.get("format_version", 0) > FORMAT_VERSION:
        raise CheckpointMismatch(
            f"{path} uses format version {header['format_version']}, "
            f"this version of audiotta reads up to {FORMAT_VERSION}"
        )
    return header, payload["arrays"]


def load_checkpoint(
    path: str, expected_config: Optional[ModelConfig] = None, storage_options=None
) -> Tuple[AdaptableModel, dict]:
    """Rebuild a model from a checkpoint

    Parameters
    ----------
    path : str
        Checkpoint written by ``save_checkpoint``
    expected_config : ModelConfig, optional
        When given, the checkpoint must have been written for this config

    Returns
    -------
    Tuple[AdaptableModel, dict]
        The model in eval mode and the metadata stored with it

    Raises
    ------
    CheckpointMissing
        If the file does not exist
    CheckpointMismatch
        If the config hash differs from the stored or expected one, or the
        stored tensors do not match the architecture
    """
    header, arrays = _read(path, storage_options)
    config = ModelConfig.from_dict(json.loads(header["model_config"]))
    stored_hash = header["config_hash"]
    if config_hash(config) != stored_hash:
        raise CheckpointMismatch(f"{path} header is inconsistent with its stored model config")
    if expected_config is not None and config_hash(expected_config) != stored_hash:
        raise CheckpointMismatch(
            f"{path} was written for config hash {stored_hash}, "
            f"expected {config_hash(expected_config)}"
        )

    model = build_model(config)
    expected_keys = {schema.key for schema in model.param_schema()}
    if set(arrays) != expected_keys:
        missing = sorted(expected_keys - set(arrays))
        unexpected = sorted(set(arrays) - expected_keys)
        raise CheckpointMismatch(
            f"{path} does not match the architecture: missing {missing}, unexpected {unexpected}"
        )
    state = {key.rpartition("|")[0]: tensor for key, tensor in arrays.items()}
    model.load_state_dict(state, strict=True)
    return model.eval(), json.loads(header["metadata"])
