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
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pytest

from audiotta.core.utils import (
    Distributed,
    Serial,
    config_hash,
    derive_seed,
    global_dask_client,
    provenance,
    run_all_on_workers,
    set_dask_client,
    to_jsonable,
)


class Color(Enum):
    RED = "red"


@dataclass(frozen=True)
class Settings:
    rate: float = 0.1
    color: Color = Color.RED
    sizes: tuple = (1, 2)


def _square(x, offset=0):
    return x * x + offset


def test_to_jsonable_converts_nested_configs():
    data = to_jsonable({"settings": Settings(), "value": np.float32(0.5), "array": np.arange(2)})
    assert data == {
        "settings": {"rate": 0.1, "color": "red", "sizes": [1, 2]},
        "value": 0.5,
        "array": [0, 1],
    }


def test_config_hash_depends_only_on_fields():
    assert config_hash(Settings()) == config_hash(Settings())
    assert config_hash(Settings()) != config_hash(Settings(rate=0.2))
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})


def test_derive_seed_is_stable_and_keyed():
    seed = derive_seed(0, "corruption")
    assert seed == derive_seed(0, "corruption")
    assert 0 <= seed < 2**32
    assert seed != derive_seed(0, "model_init")
    assert seed != derive_seed(1, "corruption")


def test_provenance_names_the_package():
    assert provenance().startswith("audio-tta ")


def test_serial_context(client):
    # Set distributed client
    set_dask_client(client=client)
    assert global_dask_client() == client

    # Check that the global dask client
    # becomes None in a `with Serial()` block
    with Serial():
        assert global_dask_client() is None

    # Global client should revert outside
    # the `with Serial()` block
    assert global_dask_client() == client


@pytest.mark.parametrize("nested_serial", [True, False])
def test_distributed_context(nested_serial):
    distributed = pytest.importorskip("distributed")

    set_dask_client(client=None)
    assert global_dask_client() is None

    with Distributed(n_workers=1, force_new=True) as dist:
        assert dist.client is not None
        assert global_dask_client() == dist.client
        assert len(dist.cluster.workers) == 1
        assert isinstance(dist.cluster, distributed.LocalCluster)

        if nested_serial:
            with Serial():
                assert global_dask_client() is None
            assert global_dask_client() == dist.client

    assert global_dask_client() is None


def test_run_all_on_workers_serial_keeps_order():
    with Serial():
        assert run_all_on_workers(_square, [3, 1, 2], offset=1) == [10, 2, 5]


def test_run_all_on_workers_with_client_keeps_order(client):
    set_dask_client(client=client)
    try:
        assert run_all_on_workers(_square, list(range(6))) == [0, 1, 4, 9, 16, 25]
    finally:
        set_dask_client(client=None)
