# Copyright 2026 The morphoprobe Authors. All Rights Reserved.
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
# ==============================================================================
"""Tokenization-scheme probing toolkit for Spanish plural agreement."""

from morphoprobe._morphoprobe import *  # noqa: F401,F403
from morphoprobe._morphoprobe import MorphoprobeError, run_cli

__all__ = [name for name in dir() if not name.startswith("_")]


def main() -> int:
    import sys

    code, out, err = run_cli(sys.argv[1:])
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
