"""Sparse signed-bucket random projection with duplicate-and-rescale preconditioning.

The transform maps R^d to R^k by replicating every coordinate c times,
rescaling by c^-0.5, and routing each replica to one of k output buckets with
a k-wise independent hash and sign. Applying it touches exactly c replicas
per nonzero input coordinate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .kwise import (
    DEFAULT_FIELD,
    KWiseGenerator,
    eval_bucket,
    eval_bucket_batch,
    eval_sign,
    eval_sign_batch,
    new_generator,
)
from .stats import partitioned_count, wilson_interval

DEFAULT_KAPPA = (1.0, 4.0, 2.0)

# modulo reduction bias k/modulus must stay below this on the production field
_MAX_BUCKET_BIAS = 2.0 ** -20


class AssumptionWarning(UserWarning):
    """Parameters left the regime in which the distortion analysis is sharp."""


@dataclass(frozen=True)
class DenseVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("dense vector entries must be finite")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def norm(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.values))

    def to_numpy(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)

    @classmethod
    def uniform(cls, d: int) -> "DenseVector":
        """Unit vector with all entries equal to d^-0.5."""
        return cls((1.0 / math.sqrt(d),) * d)


@dataclass(frozen=True)
class SparseVector:
    """Index/value pairs with strictly increasing indices and no stored zeros."""

    dim: int
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        entries = tuple((int(i), float(v)) for i, v in self.entries)
        object.__setattr__(self, "entries", entries)
        previous = -1
        for i, v in entries:
            if not 0 <= i < self.dim:
                raise ValueError(f"index {i} out of range for dim {self.dim}")
            if i <= previous:
                raise ValueError("indices must be strictly increasing")
            if v == 0.0:
                raise ValueError("stored zeros are not allowed")
            if not math.isfinite(v):
                raise ValueError("values must be finite")
            previous = i

    @property
    def nnz(self) -> int:
        return len(self.entries)

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.entries:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64)
        raw = np.asarray(self.entries, dtype=np.float64)
        return raw[:, 0].astype(np.int64), np.ascontiguousarray(raw[:, 1])

    def norm(self) -> float:
        return math.sqrt(math.fsum(v * v for _, v in self.entries))

    def to_dense(self) -> DenseVector:
        out = [0.0] * self.dim
        for i, v in self.entries:
            out[i] = v
        return DenseVector(tuple(out))

    @classmethod
    def from_dense(cls, values) -> "SparseVector":
        vals = [float(v) for v in values]
        return cls(dim=len(vals), entries=tuple((i, v) for i, v in enumerate(vals) if v != 0.0))


def parse_sparse_vector(line: str) -> SparseVector:
    """Parse one `dim;idx:val,idx:val,...` line."""
    head, sep, body = line.strip().partition(";")
    if not sep:
        raise ValueError(f"missing ';' in sparse vector line: {line!r}")
    entries = []
    if body:
        for item in body.split(","):
            idx_text, sep2, val_text = item.partition(":")
            if not sep2:
                raise ValueError(f"missing ':' in sparse entry {item!r}")
            entries.append((int(idx_text), float(val_text)))
    return SparseVector(dim=int(head), entries=tuple(entries))


def format_sparse_vector(x: SparseVector) -> str:
    body = ",".join(f"{i}:{v:.17g}" for i, v in x.entries)
    return f"{x.dim};{body}"


def read_sparse_vectors(path) -> list[SparseVector]:
    with open(path, "r", encoding="ascii") as fh:
        return [parse_sparse_vector(line) for line in fh if line.strip()]


def format_dense_vector(y: DenseVector) -> str:
    return ",".join(f"{v:.17g}" for v in y.values)


def write_dense_vectors(path, vectors) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for y in vectors:
            fh.write(format_dense_vector(y) + "\n")


@dataclass(frozen=True)
class TransformSpec:
    """Full parameterization of one sampled transform; immutable and reusable."""

    d: int
    epsilon: float
    delta: float
    m: int
    k: int
    c: int
    sparsity_gain: float
    bucket_seed: int
    sign_seed: int
    independence_degree: int
    epsilon_assumption_ok: bool = True

    def __post_init__(self) -> None:
        if min(self.d, self.m, self.k, self.c, self.independence_degree) < 1:
            raise ValueError("d, m, k, c and independence_degree must be positive")
        if self.k < self.m:
            raise ValueError("k must be at least m")


def sparsity_gain(m: int) -> float:
    """Slowly growing divisor of m in the replica-count formula; 1 below m = 3."""
    if m < 3:
        return 1.0
    return max(1.0, math.log(m) / math.log(math.log(m)))


def derive_spec(d: int, epsilon: float, delta: float, bucket_seed: int, sign_seed: int,
                constants: tuple[float, float, float] = DEFAULT_KAPPA,
                independence_degree: int | None = None) -> TransformSpec:
    """Fix every parameter of one sampled transform from (d, epsilon, delta).

    The moment order is m = ceil(kappa_m * ln(1/delta)), the target dimension
    k = ceil(kappa_k * m / epsilon^2), and the replica count
    c = ceil(kappa_c * (m / gain)^2 / epsilon) with gain = sparsity_gain(m).
    Natural logarithms throughout. epsilon <= ln(1/delta)^-2 is advisory:
    violating it records an AssumptionWarning but the transform still applies.
    """
    if not isinstance(d, int) or d < 1:
        raise ValueError("d must be a positive integer")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    kappa_m, kappa_k, kappa_c = constants
    if min(kappa_m, kappa_k, kappa_c) <= 0:
        raise ValueError("kappa constants must be positive")
    m = max(1, math.ceil(kappa_m * math.log(1.0 / delta)))
    gain = sparsity_gain(m)
    k = math.ceil(kappa_k * m / (epsilon * epsilon))
    c = math.ceil(kappa_c * (m / gain) ** 2 / epsilon)
    if independence_degree is None:
        independence_degree = 2 * m
    elif independence_degree < 1:
        raise ValueError("independence degree must be positive")
    log_budget = math.log(1.0 / delta)
    threshold = math.inf if log_budget * log_budget == 0.0 else 1.0 / (log_budget * log_budget)
    assumption_ok = epsilon <= threshold
    if not assumption_ok:
        warnings.warn(
            f"epsilon={epsilon:g} exceeds ln(1/delta)^-2={threshold:g}; "
            "the distortion guarantee weakens in this regime",
            AssumptionWarning, stacklevel=2)
    return TransformSpec(d=d, epsilon=float(epsilon), delta=float(delta), m=m, k=k, c=c,
                         sparsity_gain=gain, bucket_seed=int(bucket_seed),
                         sign_seed=int(sign_seed), independence_degree=independence_degree,
                         epsilon_assumption_ok=assumption_ok)


def bucket_generator(spec: TransformSpec) -> KWiseGenerator:
    if spec.k / DEFAULT_FIELD.modulus > _MAX_BUCKET_BIAS:
        raise ValueError("target dimension too large: bucket reduction bias exceeds 2^-20")
    return new_generator(spec.bucket_seed, spec.independence_degree, spec.k)


def sign_generator(spec: TransformSpec) -> KWiseGenerator:
    return new_generator(spec.sign_seed, spec.independence_degree, 2)


def duplicate_rescale(values: np.ndarray, c: int) -> np.ndarray:
    """Preconditioner: replica r of coordinate i sits at flat index i*c + r."""
    if c < 1:
        raise ValueError("c must be positive")
    return np.repeat(np.asarray(values, dtype=np.float64), c) / math.sqrt(c)


def _entry_arrays(x: SparseVector) -> tuple[np.ndarray, np.ndarray]:
    return x._arrays


def apply_with_generators(x: SparseVector, c: int, k: int,
                          bucket_gen: KWiseGenerator,
                          sign_gen: KWiseGenerator) -> np.ndarray:
    """Project a sparse vector through explicit generators; returns k bucket sums."""
    indices, values = _entry_arrays(x)
    if indices.size == 0:
        return np.zeros(k, dtype=np.float64)
    flat = (indices[:, None] * c + np.arange(c, dtype=np.int64)[None, :]).reshape(-1)
    replicated = np.repeat(values, c)
    buckets = eval_bucket_batch(bucket_gen, flat.astype(np.uint64))
    signs = eval_sign_batch(sign_gen, flat.astype(np.uint64))
    # bincount adds in flat-index order, pinning the accumulation order bit-for-bit
    sums = np.bincount(buckets, weights=signs * replicated, minlength=k)
    return sums / math.sqrt(c)


def apply(spec: TransformSpec, x: SparseVector) -> DenseVector:
    """Apply the sampled transform; cost scales with c * nnz(x)."""
    if x.dim != spec.d:
        raise ValueError(f"vector dimension {x.dim} does not match spec dimension {spec.d}")
    y = apply_with_generators(x, spec.c, spec.k, bucket_generator(spec), sign_generator(spec))
    return DenseVector(tuple(float(v) for v in y))


def materialize(spec: TransformSpec) -> np.ndarray:
    """Dense k x d matrix equal to the transform; for small instances only."""
    bucket_gen = bucket_generator(spec)
    sign_gen = sign_generator(spec)
    scale = 1.0 / math.sqrt(spec.c)
    out = np.zeros((spec.k, spec.d))
    for column in range(spec.d):
        for r in range(spec.c):
            flat = column * spec.c + r
            out[eval_bucket(bucket_gen, flat), column] += scale * eval_sign(sign_gen, flat)
    return out


def column_structure(spec: TransformSpec, column: int) -> list[tuple[int, int]]:
    """(bucket, sign) contribution of each replica of one input coordinate."""
    if not 0 <= column < spec.d:
        raise ValueError(f"column {column} out of range")
    bucket_gen = bucket_generator(spec)
    sign_gen = sign_generator(spec)
    return [(eval_bucket(bucket_gen, column * spec.c + r),
             eval_sign(sign_gen, column * spec.c + r))
            for r in range(spec.c)]


def apply_dense_baseline(kind: str, seed: int, k: int, x: SparseVector) -> DenseVector:
    """Classic dense projection baseline: y = A x / sqrt(k) with i.i.d. entries."""
    if k < 1:
        raise ValueError("k must be positive")
    rng = np.random.default_rng(seed)
    if kind == "rademacher":
        matrix = rng.integers(0, 2, size=(k, x.dim)).astype(np.float64) * 2.0 - 1.0
    elif kind == "gaussian":
        matrix = rng.standard_normal((k, x.dim))
    else:
        raise ValueError(f"unknown baseline kind {kind!r}")
    dense = np.zeros(x.dim)
    indices, values = _entry_arrays(x)
    dense[indices] = values
    y = matrix @ dense / math.sqrt(k)
    return DenseVector(tuple(float(v) for v in y))


def distortion_trial(spec: TransformSpec, x: SparseVector) -> float:
    """Norm ratio |Mx| / |x| for the sampled transform."""
    norm = x.norm()
    if norm == 0.0:
        raise ValueError("zero vector has no distortion ratio")
    if x.dim != spec.d:
        raise ValueError(f"vector dimension {x.dim} does not match spec dimension {spec.d}")
    y = apply_with_generators(x, spec.c, spec.k, bucket_generator(spec), sign_generator(spec))
    return float(np.sqrt(y @ y)) / norm


@dataclass(frozen=True)
class DistortionReport:
    d: int
    epsilon: float
    delta: float
    m: int
    k: int
    c: int
    trials: int
    failures: int
    failure_rate: float
    wilson_low: float
    wilson_high: float


def distortion_bench(d: int, epsilon: float, delta: float, trials: int,
                     bucket_seed: int, sign_seed: int,
                     constants: tuple[float, float, float] = DEFAULT_KAPPA,
                     x: SparseVector | None = None, workers: int = 1) -> DistortionReport:
    """Failure fraction of the distortion guarantee over independently seeded trials.

    Trial t reseeds both generators with (bucket_seed + t, sign_seed + t), so
    results do not depend on execution order or worker count.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    base = derive_spec(d, epsilon, delta, bucket_seed, sign_seed, constants)
    if x is None:
        x = SparseVector.from_dense(DenseVector.uniform(d))
    low_bound, high_bound = 1.0 - epsilon, 1.0 + epsilon

    def count_failures(start: int, stop: int) -> int:
        failures = 0
        for trial in range(start, stop):
            spec = replace(base, bucket_seed=bucket_seed + trial, sign_seed=sign_seed + trial)
            ratio = distortion_trial(spec, x)
            if ratio < low_bound or ratio > high_bound:
                failures += 1
        return failures

    failures = partitioned_count(count_failures, trials, workers)
    low, high = wilson_interval(failures, trials)
    return DistortionReport(d=d, epsilon=float(epsilon), delta=float(delta), m=base.m,
                            k=base.k, c=base.c, trials=trials, failures=failures,
                            failure_rate=failures / trials, wilson_low=low, wilson_high=high)
