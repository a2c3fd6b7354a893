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

import os

from dotenv import dotenv_values, set_key
from pydantic_settings import BaseSettings, SettingsConfigDict

from normal_ratio.utils.log import log

env_path = os.path.join(os.getcwd(), ".env")  # Load .env from the current working directory
ENV_PREFIX = "NORMAL_RATIO_"


class BaseConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=env_path,
        env_prefix=ENV_PREFIX,
        case_sensitive=False,
        extra="ignore",  # ignore extra fields to avoid ValidationError
        env_ignore_empty=True,
    )

    def _env_items(self):
        return {f"{ENV_PREFIX}{k}".upper(): v for k, v in self.model_dump().items()}

    def generate_env(self, overwrite: bool = False):
        if os.path.exists(env_path) and not overwrite:
            log.info("%s already exists, merging missing keys only", env_path)
            self.update_env()
            return
        with open(env_path, "w", encoding="utf-8") as f:
            for k, v in self._env_items().items():
                f.write(f"{k}=\n" if v is None else f"{k}={v}\n")
        log.info("Generate %s successfully!", env_path)

    def update_env(self):
        env_config = dotenv_values(env_path)

        # dotenv_values make None to '', while pydantic make None to None
        # dotenv_values make numbers to strings, while pydantic keeps them typed
        for k, v in self._env_items().items():
            if k in env_config:
                if not (env_config[k] or v):
                    continue
                if env_config[k] == str(v):
                    continue
            log.info("Update %s: %s=%s", env_path, k, v)
            set_key(env_path, k, "" if v is None else str(v), quote_mode="never")

    def __init__(self, **data):
        try:
            super().__init__(**data)
            if os.path.exists(env_path):
                log.debug("The %s file was loaded. Class: %s", env_path, self.__class__.__name__)
        except Exception as e:
            log.error("An error occurred when initializing the configuration object: %s", str(e))
            raise
