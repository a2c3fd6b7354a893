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

import json
from pathlib import Path
from typing import List, Union

from pydantic import BaseModel, ConfigDict, FiniteFloat, ValidationError, field_validator, model_validator

from normal_ratio.structure import NormalRatioModel
from normal_ratio.utils.exceptions import InputError, ModelFileError


class ModelFile(BaseModel):
    """On-disk model: {"mu": [...], "sigma": [[...], ...]}, row-major sigma."""

    model_config = ConfigDict(extra="forbid")

    mu: List[FiniteFloat]
    sigma: List[List[FiniteFloat]]

    @field_validator("mu")
    @classmethod
    def validate_mu(cls, mu: List[float]) -> List[float]:
        if len(mu) < 2:
            raise ValueError(f"dimension p must be at least 2, got {len(mu)}")
        return mu

    @model_validator(mode="after")
    def validate_shape(self) -> "ModelFile":
        p = len(self.mu)
        if len(self.sigma) != p:
            raise ValueError(f"sigma must have {p} rows to match mu, got {len(self.sigma)}")
        for i, row in enumerate(self.sigma):
            if len(row) != p:
                raise ValueError(f"sigma row {i} has {len(row)} entries, expected {p}")
        return self

    def to_model(self) -> NormalRatioModel:
        return NormalRatioModel.from_arrays(self.mu, self.sigma)


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(loc) for loc in item["loc"]) or "model"
        parts.append(f"{where}: {item['msg']}")
    return "; ".join(parts)


def parse_model(text: str, source: str = "<model>") -> NormalRatioModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFileError(f"{source}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    try:
        parsed = ModelFile.model_validate(data)
    except ValidationError as e:
        raise ModelFileError(f"{source}: {_describe(e)}") from e
    try:
        return parsed.to_model()
    except InputError as e:
        raise ModelFileError(f"{source}: sigma: {e}") from e


def load_model(path: Union[str, Path]) -> NormalRatioModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ModelFileError(f"model file not found: {path}") from e
    except OSError as e:
        raise ModelFileError(f"cannot read model file {path}: {e}") from e
    return parse_model(text, source=str(path))


def dump_model(model: NormalRatioModel) -> str:
    return json.dumps(model.to_dict(), indent=2) + "\n"
