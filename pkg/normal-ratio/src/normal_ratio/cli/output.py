#  Licensed to the Apache Software Foundation (ASF) under one or more
#  contributor license agreements.  See the NOTICE file distributed with
#  this work for additional information regarding copyright ownership.
#  The ASF licenses this file to You under the Apache License, Version 2.0
#  (the "License"); you may not use this file except in compliance with
#  the License.  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

"""Number formatting and tabular writers for the command line.

Values are printed with 17 significant digits and error estimates with 3.
The `g` format drops trailing zeros, so 0.5 prints as "0.5": the omitted digits
are zeros and every printed value still parses back to the same double.
CSV goes through pandas with the same value format, newline-terminated and
independent of locale; JSON uses the shortest round-trip float repr.
"""

import json
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from normal_ratio.structure import SampleBatch

VALUE_FORMAT = ".17g"
ERROR_FORMAT = ".3g"
CSV_FLOAT_FORMAT = "%.17g"


def fmt_value(x: float) -> str:
    return format(x, VALUE_FORMAT)


def fmt_error(x: float) -> str:
    return format(x, ERROR_FORMAT)


def ratio_columns(dim: int) -> List[str]:
    return [f"y{i + 1}" for i in range(dim)]


def _records(frame: pd.DataFrame, y_columns: Sequence[str]) -> List[Dict]:
    rest = [c for c in frame.columns if c not in y_columns]
    y = frame[list(y_columns)].to_numpy()
    others = {c: frame[c].to_numpy() for c in rest}
    return [{"y": y[i].tolist(), **{c: float(v[i]) for c, v in others.items()}} for i in range(len(frame))]


def write_frame(frame: pd.DataFrame, out: Optional[str], fmt: str, y_columns: Sequence[str]):
    """Write to `out`, or standard output when out is None or "-"."""
    to_stdout = out in (None, "-")
    if fmt == "json":
        text = json.dumps(_records(frame, y_columns)) + "\n"
        if to_stdout:
            sys.stdout.write(text)
        else:
            with open(out, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
        return
    target = sys.stdout if to_stdout else out
    frame.to_csv(target, float_format=CSV_FLOAT_FORMAT, index=False, lineterminator="\n", encoding="utf-8")


def grid_frame(points: np.ndarray, values: np.ndarray, value_name: str = "density") -> pd.DataFrame:
    frame = pd.DataFrame(points, columns=ratio_columns(points.shape[1]))
    frame[value_name] = values
    return frame


def sample_frame(batch: SampleBatch) -> pd.DataFrame:
    return pd.DataFrame(batch.ratios, columns=ratio_columns(batch.ratio_dim))


def read_sample_csv(path: str, seed: int = 0) -> SampleBatch:
    """Re-read a sample CSV bit-exactly."""
    frame = pd.read_csv(path, float_precision="round_trip")
    return SampleBatch(ratios=frame.to_numpy(dtype=np.float64), seed=seed)
