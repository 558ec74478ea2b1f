# Copyright 2026 The ggsim Authors.
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

"""Sampling and statistical verification of overlap identities for discrete
random measures: Poisson-Dirichlet and cascade samplers, exponential-tilt and
random-deletion transforms, and the Ghirlanda-Guerra identity test suite."""

from ggsim._core import *  # noqa: F401,F403
from ggsim._core import __version__  # noqa: F401
