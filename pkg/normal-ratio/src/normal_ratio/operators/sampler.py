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

"""Seeded Monte Carlo for the ratio distribution.

Rows are drawn in fixed-size substreams. Substream k uses a Philox
counter-based generator keyed by SeedSequence(seed, spawn_key=(k,)), and
standard normals come from the inverse normal CDF applied to 53-bit
uniforms, so the output depends only on (model, n, seed).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from numpy.random import Generator, Philox, SeedSequence
from scipy import special

from normal_ratio.config import ratio_settings
from normal_ratio.structure import DensityHistogram, NormalRatioModel, SampleBatch
from normal_ratio.utils.decorators import log_time
from normal_ratio.utils.exceptions import DimensionMismatchError, InputError, NonFiniteInputError, WindowEmptyError
from normal_ratio.utils.log import log

MAX_SEED = 1 << 64
_UNIFORM_BITS = 53
_UNIFORM_SCALE = 2.0**-_UNIFORM_BITS


def _check_seed(seed: int) -> int:
    if not 0 <= seed < MAX_SEED:
        raise InputError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return int(seed)


def _substream_normals(seed: int, stream: int, rows: int, cols: int) -> np.ndarray:
    rng = Generator(Philox(SeedSequence(seed, spawn_key=(stream,))))
    bits = rng.integers(0, 1 << _UNIFORM_BITS, size=(rows, cols), dtype=np.uint64)
    # midpoints of the 2^53 grid, strictly inside (0, 1)
    u = (bits.astype(np.float64) + 0.5) * _UNIFORM_SCALE
    return special.ndtri(u)


@log_time("mvn sampling")
def sample_mvn(
    model: NormalRatioModel,
    n: int,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    stream_rows: Optional[int] = None,
) -> np.ndarray:
    """n rows of mu + L xi; bit-identical for the same (model, n, seed) at any worker count."""
    if n < 1:
        raise InputError(f"sample size must be positive, got {n}")
    seed = _check_seed(ratio_settings.default_seed if seed is None else seed)
    workers = workers or ratio_settings.workers
    stream_rows = stream_rows or ratio_settings.sample_stream_rows
    p = model.p
    chol_t = model.sigma.chol.T
    bounds = [(k, min(stream_rows, n - k * stream_rows)) for k in range(math.ceil(n / stream_rows))]

    def _draw(bound) -> np.ndarray:
        stream, rows = bound
        return model.mu + _substream_normals(seed, stream, rows, p) @ chol_t

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_draw, bounds))
    else:
        blocks = [_draw(b) for b in bounds]
    log.debug("Drew %d rows from %d substream(s) with seed %d", n, len(bounds), seed)
    return np.concatenate(blocks, axis=0)


def to_ratios(x: np.ndarray, seed: int = 0) -> SampleBatch:
    """Rows (x1, ..., xp) -> (x2/x1, ..., xp/x1); rows with x1 == 0 are dropped and counted."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 2:
        raise DimensionMismatchError(f"expected an n x p matrix with p >= 2, got shape {x.shape}")
    keep = x[:, 0] != 0.0
    dropped = int(x.shape[0] - np.count_nonzero(keep))
    if dropped:
        log.warning("Dropped %d draw(s) with x1 == 0", dropped)
    kept = x[keep]
    return SampleBatch(ratios=kept[:, 1:] / kept[:, :1], seed=seed, redraws=dropped)


def sample_ratios(
    model: NormalRatioModel, n: int, seed: Optional[int] = None, workers: Optional[int] = None
) -> SampleBatch:
    seed = ratio_settings.default_seed if seed is None else seed
    return to_ratios(sample_mvn(model, n, seed=seed, workers=workers), seed=seed)


def _check_threshold(batch: SampleBatch, t: Sequence[float]) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    if t.shape[0] != batch.ratio_dim:
        raise DimensionMismatchError(f"t has {t.shape[0]} coordinates, samples have {batch.ratio_dim}")
    if not np.all(np.isfinite(t)):
        raise NonFiniteInputError(f"t must be finite, got {t.tolist()}")
    return t


def empirical_cdf(batch: SampleBatch, t: Sequence[float]) -> float:
    """Fraction of rows strictly below t in every coordinate."""
    t = _check_threshold(batch, t)
    if batch.n == 0:
        raise InputError("empirical cdf of an empty sample")
    return float(np.count_nonzero(np.all(batch.ratios < t, axis=1)) / batch.n)


def empirical_cdf_standard_error(q: float, n: int) -> float:
    return math.sqrt(q * (1.0 - q) / n)


def binned_density(
    batch: SampleBatch, lo: Sequence[float], hi: Sequence[float], bins_per_dim: int
) -> DensityHistogram:
    """Histogram over [lo, hi] normalized by n * bin volume; samples outside still count in n."""
    lo = np.asarray(lo, dtype=np.float64).reshape(-1)
    hi = np.asarray(hi, dtype=np.float64).reshape(-1)
    d = batch.ratio_dim
    if d not in (1, 2):
        raise DimensionMismatchError(f"binned density supports 1 or 2 ratio dimensions, got {d}")
    if lo.shape[0] != d or hi.shape[0] != d:
        raise DimensionMismatchError(f"window bounds must have {d} coordinates")
    if not np.all(lo < hi):
        raise InputError(f"window needs lo < hi componentwise, got lo={lo.tolist()}, hi={hi.tolist()}")
    if bins_per_dim < 1:
        raise InputError(f"bins_per_dim must be positive, got {bins_per_dim}")

    counts, edges = np.histogramdd(batch.ratios, bins=bins_per_dim, range=list(zip(lo, hi)))
    if counts.sum() == 0:
        raise WindowEmptyError(f"no sample falls inside [{lo.tolist()}, {hi.tolist()}]")
    volume = float(np.prod((hi - lo) / bins_per_dim))
    return DensityHistogram(edges=tuple(edges), density=counts / (batch.n * volume), counts=counts, n=batch.n)
