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
import importlib

import pytest

MODULES = [
    "audiotta.schema",
    "audiotta.corruption",
    "audiotta.features",
    "audiotta.models",
    "audiotta.adapt",
    "audiotta.conmix",
    "audiotta.harness.runner",
    "audiotta.harness.report",
    "audiotta.harness.cli",
]


@pytest.mark.parametrize("name", MODULES)
def test_module_imports(name):
    importlib.import_module(name)


def test_schema_exports_tag_types():
    from audiotta.schema import ParamTagsType
    from audiotta.schema.tags import ParamTagsType as defined

    assert ParamTagsType is defined
