#!/usr/bin/env python3
# Copyright 2026 The nova-infer Authors
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Runs `nova generate` in each mode and validates report.json.

usage: validate_report.py <nova-binary> <report.schema.json>
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    cli, schema_path = sys.argv[1], Path(sys.argv[2])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for mode in ("off", "nova", "scale_only", "layer_only", "fixed"):
        with tempfile.TemporaryDirectory() as tmp:
            subprocess.run([cli, "generate", "--mode", mode, "--out-dir", tmp], check=True)
            report = json.loads((Path(tmp) / "report.json").read_text())
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for e in errors:
            print(f"{mode}: {'/'.join(map(str, e.path))}: {e.message}")
        # off never detects an inflection, so the optional keys must be absent.
        if mode == "off" and "t_star" in report:
            print("off: t_star present")
            errors.append(None)
        failures += bool(errors)
        print(f"{mode}: {'ok' if not errors else 'INVALID'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
