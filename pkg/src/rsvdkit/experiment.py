"""Convergence-sweep harness: run (algorithm, q, seed) grids, evaluate the
error measures against the exact oracle, and emit schema-stable CSV plus a
JSON summary.

CSV column set is fixed: algo,k,p,q,seed,frob_ratio,spectral_ratio,
per_vector_max,wall_ms. All numeric output uses 17 significant digits so
float64 values round-trip; wall_ms is excluded from any determinism claim.
"""

from __future__ import annotations

import hashlib
import json
import os
import statistics
from dataclasses import dataclass

import numpy as np

from .factor import ORACLE_DIM_LIMIT, dense_svd_reference
from .matrix import as_operator, load_dense_csv, load_matrix_market
from .metrics import compute_error_report
from .rsvd import RsvdConfig, Variant, factorize
from .synth import SyntheticSpec, synth_matrix

__all__ = [
    "ExperimentSpec",
    "OracleSpectrum",
    "run_experiment",
    "rows_to_csv",
    "load_input",
    "oracle_spectrum",
]

CSV_COLUMNS = (
    "algo",
    "k",
    "p",
    "q",
    "seed",
    "frob_ratio",
    "spectral_ratio",
    "per_vector_max",
    "wall_ms",
)

ORACLE_CACHE_ENV = "RSVD_ORACLE_CACHE"


@dataclass(frozen=True)
class OracleSpectrum:
    """Slim stand-in for a full SVD when only singular values are needed."""

    singular_values: np.ndarray

    def __post_init__(self):
        sv = np.array(self.singular_values, dtype=np.float64, copy=True)
        sv.setflags(write=False)
        object.__setattr__(self, "singular_values", sv)


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: an input, an algorithm list, a q (or epsilon) grid, seeds.

    ``input_path`` and ``synthetic`` are mutually exclusive. ``q_list`` and
    ``eps_list`` are mutually exclusive; epsilon entries are resolved to q
    per algorithm. ``oracle_policy`` is "compute" or "cache" (cache requires
    the RSVD_ORACLE_CACHE directory to be set).
    """

    algorithms: tuple
    k: int
    seeds: tuple
    p: int | None = None
    q_list: tuple = ()
    eps_list: tuple = ()
    C: float = 4.0
    input_path: str | None = None
    synthetic: SyntheticSpec | None = None
    oracle_policy: str = "compute"

    def __post_init__(self):
        algos = tuple(Variant(str(a).lower()) for a in self.algorithms)
        if not algos:
            raise ValueError("need at least one algorithm")
        object.__setattr__(self, "algorithms", algos)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.seeds:
            raise ValueError("need at least one seed")
        object.__setattr__(self, "q_list", tuple(int(q) for q in self.q_list))
        object.__setattr__(self, "eps_list", tuple(float(e) for e in self.eps_list))
        if bool(self.q_list) == bool(self.eps_list):
            raise ValueError("give exactly one of q_list or eps_list")
        if (self.input_path is None) == (self.synthetic is None):
            raise ValueError("give exactly one of input_path or synthetic")
        if self.oracle_policy not in ("compute", "cache"):
            raise ValueError("oracle_policy must be 'compute' or 'cache'")

    @classmethod
    def from_dict(cls, obj):
        synth = obj.get("synthetic")
        return cls(
            algorithms=tuple(obj["algorithms"]),
            k=int(obj["k"]),
            p=int(obj["p"]) if obj.get("p") is not None else None,
            q_list=tuple(obj.get("q_list", ())),
            eps_list=tuple(obj.get("eps_list", ())),
            C=float(obj.get("C", 4.0)),
            seeds=tuple(obj["seeds"]),
            input_path=obj.get("input"),
            synthetic=SyntheticSpec.from_dict(synth) if synth else None,
            oracle_policy=obj.get("oracle_policy", "compute"),
        )

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {
            "algorithms": [a.value for a in self.algorithms],
            "k": self.k,
            "p": self.p,
            "q_list": list(self.q_list),
            "eps_list": list(self.eps_list),
            "C": self.C,
            "seeds": list(self.seeds),
            "input": self.input_path,
            "synthetic": self.synthetic.to_dict() if self.synthetic else None,
            "oracle_policy": self.oracle_policy,
        }


def load_input(spec):
    """Materialize the input operator from a file path or synthetic spec."""
    if spec.synthetic is not None:
        return as_operator(synth_matrix(spec.synthetic))
    path = spec.input_path
    ext = os.path.splitext(path)[1].lower()
    if ext in (".mtx", ".mm"):
        return load_matrix_market(path)
    return as_operator(load_dense_csv(path))


def _content_key(op):
    h = hashlib.sha256()
    if op.is_sparse:
        sp = op.matrix
        h.update(b"csr")
        h.update(np.asarray(sp.shape, dtype=np.int64).tobytes())
        h.update(sp.row_ptr.tobytes())
        h.update(sp.col_idx.tobytes())
        h.update(sp.values.tobytes())
    else:
        h.update(b"dense")
        h.update(np.asarray(op.shape, dtype=np.int64).tobytes())
        h.update(op.matrix.data.tobytes())
    return h.hexdigest()


def oracle_spectrum(op, policy="compute"):
    """Oracle singular values, optionally via the content-hash cache.

    The cache directory comes from RSVD_ORACLE_CACHE; with policy "cache"
    and no directory set, the oracle is computed fresh. Above the dense
    guard the cache is the only path and a missing entry is an error.
    """
    cache_dir = os.environ.get(ORACLE_CACHE_ENV)
    cache_file = None
    if policy == "cache" and cache_dir:
        cache_file = os.path.join(cache_dir, f"oracle-{_content_key(op)}.json")
        if os.path.exists(cache_file):
            with open(cache_file, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            return OracleSpectrum(np.asarray(data["singular_values"], dtype=np.float64))
    n, d = op.shape
    if min(n, d) > ORACLE_DIM_LIMIT:
        raise ValueError(
            f"input needs an exact oracle but min(n, d) = {min(n, d)} exceeds "
            f"{ORACLE_DIM_LIMIT}; precompute singular values into the "
            f"{ORACLE_CACHE_ENV} cache or shrink the input"
        )
    sv = dense_svd_reference(op).singular_values
    if cache_file is not None:
        os.makedirs(cache_dir, exist_ok=True)
        with open(cache_file, "w", encoding="utf-8") as fh:
            json.dump({"singular_values": [float(s) for s in sv]}, fh)
    return OracleSpectrum(sv)


def _fmt(x):
    return f"{x:.17g}"


def run_experiment(spec):
    """Execute the sweep; returns (rows, summary).

    Rows are dicts in deterministic (algo, q, seed) order. The summary echoes
    the configuration, records oracle sigma_1 .. sigma_{k+1}, and holds
    per-(algorithm, q) medians across seeds.
    """
    op = load_input(spec)
    oracle = oracle_spectrum(op, spec.oracle_policy)
    n, d = op.shape

    grid = []
    for algo in spec.algorithms:
        if spec.q_list:
            qs = spec.q_list
        else:
            qs = tuple(
                RsvdConfig(
                    k=spec.k, variant=algo, p=spec.p, epsilon=e, C=spec.C
                ).resolve_q(d)
                for e in spec.eps_list
            )
        for q in qs:
            for seed in spec.seeds:
                grid.append((algo, q, seed))
    grid.sort(key=lambda t: (t[0].value, t[1], t[2]))

    rows = []
    for algo, q, seed in grid:
        cfg = RsvdConfig(k=spec.k, variant=algo, p=spec.p, q=q, seed=seed)
        result = factorize(op, cfg)
        report = compute_error_report(
            op, result.Z, oracle, q=q, variant=algo, seed=seed
        )
        rows.append(
            {
                "algo": algo.value,
                "k": spec.k,
                "p": cfg.p,
                "q": q,
                "seed": seed,
                "frob_ratio": report.frob_ratio,
                "spectral_ratio": report.spectral_ratio,
                "per_vector_max": report.per_vector_max,
                "wall_ms": result.wall_time_ms,
            }
        )

    sv = oracle.singular_values
    medians = {}
    for algo in spec.algorithms:
        by_q = {}
        for q in sorted({row["q"] for row in rows if row["algo"] == algo.value}):
            cohort = [r for r in rows if r["algo"] == algo.value and r["q"] == q]
            by_q[str(q)] = {
                "frob_ratio": statistics.median(r["frob_ratio"] for r in cohort),
                "spectral_ratio": statistics.median(r["spectral_ratio"] for r in cohort),
                "per_vector_max": statistics.median(r["per_vector_max"] for r in cohort),
            }
        medians[algo.value] = by_q
    summary = {
        "config": spec.to_dict(),
        "shape": [n, d],
        "oracle_top_singular_values": [float(s) for s in sv[: spec.k + 1]],
        "medians": medians,
    }
    return rows, summary


def rows_to_csv(rows):
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                [
                    row["algo"],
                    str(row["k"]),
                    str(row["p"]),
                    str(row["q"]),
                    str(row["seed"]),
                    _fmt(row["frob_ratio"]),
                    _fmt(row["spectral_ratio"]),
                    _fmt(row["per_vector_max"]),
                    _fmt(row["wall_ms"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"
