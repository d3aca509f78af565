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
# flake8: noqa
from audiotta.harness.config import GridConfig
from audiotta.harness.datasets import (
    DatasetId,
    DatasetSpec,
    build_splits,
    load_split,
    make_toy_dataset,
)
from audiotta.harness.experiment import ExperimentCell, Method, RunRecord
from audiotta.harness.report import Layout, load_records, report
from audiotta.harness.runner import (
    RunContext,
    build_grid,
    evaluate_clean,
    pretrain,
    run_cell,
    run_grid,
    run_mtda,
)
