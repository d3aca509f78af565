#
# Copyright (c) 2022, NVIDIA CORPORATION.
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

from setuptools import find_namespace_packages, setup


def parse_requirements(filename):
    """load requirements from a pip requirements file"""
    lineiter = (line.strip() for line in open(filename))
    return [line for line in lineiter if line and not line.startswith("#")]


def read_version():
    path = os.path.join(os.path.dirname(os.path.realpath(__file__)), "audiotta", "_version.py")
    namespace = {}
    with open(path, encoding="utf8") as f:
        exec(f.read(), namespace)
    return namespace["__version__"]


install_reqs = parse_requirements("./requirements.txt")

setup(
    name="audio-tta",
    version=read_version(),
    packages=find_namespace_packages(include=["audiotta*"]),
    license="Apache 2.0",
    long_description=open("README.md", encoding="utf8").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Programming Language :: Python :: 3",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Topic :: Multimedia :: Sound/Audio :: Analysis",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    zip_safe=False,
    python_requires=">=3.8",
    install_requires=install_reqs,
    entry_points={"console_scripts": ["audio-tta=audiotta.harness.cli:main"]},
)
