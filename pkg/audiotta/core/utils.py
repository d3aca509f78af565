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
import dataclasses
import enum
import importlib
import json
import subprocess
import warnings
from contextvars import ContextVar

import dask
import numpy as np
from dask.base import tokenize
from dask.distributed import Client, get_client
from tqdm import tqdm

from audiotta._version import __version__

_audiotta_dask_client = ContextVar("_audiotta_dask_client", default="auto")


def to_jsonable(obj):
    """Convert configs (dataclasses, enums, numpy scalars) to plain JSON types"""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def config_hash(config) -> str:
    """Stable hash of a configuration object.

    The object is converted to its canonical JSON form (sorted keys) before
    hashing, so two configs with equal fields always share a hash.
    """
    canonical = json.dumps(to_jsonable(config), sort_keys=True)
    return tokenize(canonical)


def derive_seed(master_seed: int, key: str) -> int:
    """Derive a named sub-seed from a master seed with a keyed hash

    Parameters
    ----------
    master_seed : int
        Seed of the experiment
    key : str
        Purpose of the sub-seed, e.g. ``"corruption"`` or ``"model_init"``

    Returns
    -------
    int
        A seed in ``[0, 2**32)``
    """
    return int(tokenize(int(master_seed), str(key)), 16) % (2**32)


def provenance() -> str:
    """Package version plus ``git describe`` output when run from a checkout"""
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            check=True,
            timeout=5,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        described = ""
    return f"audio-tta {__version__}" + (f" ({described})" if described else "")


class Distributed:
    """Distributed-Execution Context Manager

    Runs the cells of an experiment grid on a Dask cluster. If no
    global client is detected (or `force_new=True`), a local
    ``distributed.LocalCluster`` is deployed for the lifetime of
    the context.

    Parameters
    -----------
    client : `dask.distributed.Client`; Optional
        The client to use for distributed-Dask execution.
    force_new : bool
        Whether to force the creation of a new local cluster
        in the case that a global client object is already
        detected. Default is False.
    **cluster_options :
        Key-word arguments to pass to ``LocalCluster``
        (e.g. `n_workers=2`).

    Examples
    --------
    ::

        from audiotta.core.utils import Distributed

        with Distributed(n_workers=4, threads_per_worker=1):
            records = run_grid(grid_config)
    """

    def __init__(self, client=None, force_new=False, **cluster_options):
        self._initial_client = global_dask_client()
        self._client = client or "auto"
        self.cluster_options = cluster_options
        # We can only shut down the cluster in `deactivate`
        # if we are generating it internally
        set_dask_client(self._client)
        self._allow_shutdown = global_dask_client() is None or force_new
        self._active = False
        self.force_new = force_new
        self._activate()

    @property
    def client(self):
        return self._client

    @property
    def cluster(self):
        return self.client.cluster

    def _activate(self):
        if not self._active:
            self._client = set_dask_client(
                self._client,
                new_cluster="cpu",
                force_new=self.force_new,
                **self.cluster_options,
            )
        self._active = True
        if self._client in ("auto", None):
            raise RuntimeError("Failed to deploy a new local cpu cluster.")

    def _deactivate(self):
        self._client = set_dask_client(self._initial_client)
        self._active = False

    def deactivate(self):
        if self._allow_shutdown and self._active:
            self._client.close()
        self._deactivate()

    def __enter__(self):
        self._activate()
        return self

    def __exit__(self, *args):
        self.deactivate()


class Serial:
    """Serial-Execution Context Manager

    Every grid cell submitted within the ``with Serial()`` block runs
    in the calling process, one after the other, even if a global
    Dask client exists.
    """

    def __init__(self):
        self._initial_client = global_dask_client()
        self._client = self._initial_client
        self._active = False
        self._activate()

    @property
    def client(self):
        return self._client

    def _activate(self):
        # Serial execution means the global client is `None`
        if not self._active:
            set_dask_client(None)
        self._active = True
        if global_dask_client() is not None:
            raise RuntimeError("Failed to activate serial-execution mode.")

    def deactivate(self):
        set_dask_client(self._initial_client)
        self._active = False
        if self._initial_client is not None and global_dask_client() is None:
            raise RuntimeError("Failed to deactivate serial-execution mode.")

    def __enter__(self):
        self._activate()
        return self

    def __exit__(self, *args):
        self.deactivate()


def set_dask_client(client="auto", new_cluster=None, force_new=False, **cluster_options):
    """Set the Dask-Distributed client

    Parameters
    -----------
    client : {"auto", None} or `dask.distributed.Client`
        The client to use for distributed-Dask execution.
        If `"auto"` (default) the current python context will
        be searched for an existing client object. Specify
        `None` to disable distributed execution altogether.
    new_cluster : {"cpu", None}
        Type of local cluster to generate in the case that
        `client="auto"` and a global dask client is not
        detected in the current python context.
    force_new : bool
        Whether to force the creation of a new local cluster
        in the case that a global client object is already
        detected. Default is False.
    **cluster_options :
        Key-word arguments to pass to the local-cluster constructor.
    """
    _audiotta_dask_client.set(client)

    if new_cluster and client is not None:
        if new_cluster != "cpu":
            raise ValueError(f"{new_cluster} not a supported option for new_cluster.")
        if global_dask_client() is not None and not force_new:
            warnings.warn(
                "Existing Dask-client object detected in the "
                "current context. New cpu cluster will not be deployed. "
                "Set force_new to True to ignore running clusters."
            )
        else:
            distributed = importlib.import_module("distributed")
            _audiotta_dask_client.set(Client(distributed.LocalCluster(**cluster_options)))

    active = _audiotta_dask_client.get()
    return None if active == "auto" else active


def global_dask_client():
    audiotta_client = _audiotta_dask_client.get()
    if audiotta_client and audiotta_client != "auto":
        if audiotta_client.cluster and audiotta_client.cluster.workers:
            return audiotta_client
        else:
            # Our cached client is no-longer active
            audiotta_client = "auto"
    if audiotta_client == "auto":
        try:
            set_dask_client(get_client())
            return _audiotta_dask_client.get()
        except ValueError:
            pass
    return None


def run_all_on_workers(func, arg_list, desc=None, **kwargs):
    """Map ``func`` over ``arg_list``, in parallel when a Dask client is active.

    Results come back in the order of ``arg_list``.
    """
    arg_list = list(arg_list)
    if global_dask_client():
        tasks = [dask.delayed(func)(arg, **kwargs) for arg in arg_list]
        return list(dask.compute(*tasks))
    return [func(arg, **kwargs) for arg in tqdm(arg_list, desc=desc, disable=desc is None)]
