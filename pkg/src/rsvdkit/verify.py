"""Invariant battery: executable checks for every module's contracts.

Each check runs on fixed seeds and returns (passed, detail). The battery is
the release gate behind the ``verify`` CLI subcommand: any failure names the
check and exits nonzero.
"""

from __future__ import annotations

import hashlib
import math
import os
import tempfile

import numpy as np

from . import backend, factor
from .chebyshev import ShiftedChebyshev, cheb_coefficients
from .experiment import ExperimentSpec, rows_to_csv, run_experiment
from .matrix import (
    DenseMatrix,
    SeededRng,
    SparseMatrixCSR,
    as_operator,
    frobenius_norm_sq,
    gaussian,
    load_matrix_market,
    matmul,
    spmm,
)
from .metrics import (
    compute_error_report,
    error_function,
    frob_error_ratio,
    per_vector_errors,
    spectral_error_ratio,
)
from .rsvd import RsvdConfig, Variant, factorize
from .synth import SyntheticSpec, synth_matrix

__all__ = ["verify_suite", "run_checks"]


def _random_dense(n, d, seed):
    return gaussian(n, d, SeededRng(seed))


def _random_csr(n, d, seed, density=0.1):
    rng = SeededRng(seed)
    vals = rng.normal_fill(n * d)
    gates = rng.normal_fill(n * d)
    cut = np.quantile(gates, density)
    ri, ci, vv = [], [], []
    idx = 0
    for i in range(n):
        for j in range(d):
            if gates[idx] < cut and vals[idx] != 0.0:
                ri.append(i)
                ci.append(j)
                vv.append(vals[idx])
            idx += 1
    return SparseMatrixCSR.from_coo(n, d, ri, ci, vv)


def _random_orthogonal(n, seed):
    return factor._mgs(gaussian(n, n, SeededRng(seed)).data)


# --------------------------------------------------------------- matrix


def check_spmm_matches_densified(_):
    worst = 0.0
    for seed in (10, 11, 12):
        sp = _random_csr(30, 20, seed)
        b = _random_dense(20, 7, seed + 100).data
        bt = _random_dense(30, 6, seed + 200).data
        dense = sp.toarray()
        got = spmm(sp, b).data
        want = backend.mm(dense, b)
        worst = max(worst, float(np.max(np.abs(got - want))))
        got_t = spmm(sp, bt, transpose_A=True).data
        want_t = backend.mm(np.ascontiguousarray(dense.T), bt)
        worst = max(worst, float(np.max(np.abs(got_t - want_t))))
    return worst < 1e-12, f"max deviation {worst:.3e}"


def check_matmul_deterministic(_):
    a = _random_dense(17, 9, 3)
    b = _random_dense(9, 5, 4)
    c1 = matmul(a, b).data
    c2 = matmul(a, b).data
    if not np.array_equal(c1, c2):
        return False, "repeat product not bitwise identical"
    return True, "bitwise stable across invocations"


def check_matrix_market_frobenius(_):
    sp = _random_csr(25, 18, 21)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "m.mtx")
        from .matrix import write_matrix_market

        write_matrix_market(sp, path)
        op = load_matrix_market(path)
        acc = 0.0
        with open(path, "r", encoding="utf-8") as fh:
            fh.readline()
            fh.readline()
            for line in fh:
                acc += float(line.split()[2]) ** 2
        got = frobenius_norm_sq(op.densify())
    rel = abs(got - acc) / max(acc, 1e-300)
    return rel < 1e-12, f"relative deviation {rel:.3e}"


def check_gaussian_reproducible(_):
    a = gaussian(40, 3, SeededRng(99)).data
    b = gaussian(40, 3, SeededRng(99)).data
    c = gaussian(40, 3, SeededRng(100)).data
    if not np.array_equal(a, b):
        return False, "equal seeds differ"
    if np.array_equal(a, c):
        return False, "different seeds collide"
    return True, "equal seeds bitwise equal, different seeds differ"


# --------------------------------------------------------------- factor


def check_qr_orthonormal(_):
    worst = 0.0
    m = _random_dense(50, 8, 7)
    q = factor.qr_orthonormalize(m).data
    worst = max(worst, float(np.max(np.abs(q.T @ q - np.eye(8)))))
    span = float(
        np.linalg.norm(q @ (q.T @ m.data) - m.data)
        / np.linalg.norm(m.data)
    )
    deficient = np.hstack([m.data[:, :3], m.data[:, :3]])
    qd = factor.qr_orthonormalize(DenseMatrix(deficient)).data
    worst = max(worst, float(np.max(np.abs(qd.T @ qd - np.eye(6)))))
    ok = worst < 1e-12 and span < 1e-10
    return ok, f"orthonormality {worst:.3e}, span residual {span:.3e}"


def check_eig_similarity_invariant(_):
    base = _random_dense(8, 8, 31).data
    sym = 0.5 * (base + base.T)
    w = _random_orthogonal(8, 32)
    rotated = w @ sym @ w.T
    rotated = 0.5 * (rotated + rotated.T)
    e1 = factor.symmetric_eig(sym).eigenvalues
    e2 = factor.symmetric_eig(rotated).eigenvalues
    worst = float(np.max(np.abs(e1 - e2)))
    return worst < 1e-10, f"eigenvalue multiset deviation {worst:.3e}"


def check_eig_reconstruction(_):
    base = _random_dense(12, 12, 33).data
    sym = 0.5 * (base + base.T)
    eig = factor.symmetric_eig(sym)
    v = eig.eigenvectors.data
    recon = v @ np.diag(eig.eigenvalues) @ v.T
    worst = float(np.max(np.abs(recon - sym)))
    limit = 1e-8 * float(np.linalg.norm(sym))
    return worst < limit, f"reconstruction deviation {worst:.3e} (limit {limit:.3e})"


def check_svd_rotation_invariant(_):
    a = _random_dense(14, 9, 41).data
    w_left = _random_orthogonal(14, 42)
    w_right = _random_orthogonal(9, 43)
    sv1 = factor.dense_svd_reference(DenseMatrix(a)).singular_values
    sv2 = factor.dense_svd_reference(DenseMatrix(w_left @ a @ w_right)).singular_values
    m = min(sv1.size, sv2.size)
    worst = float(np.max(np.abs(sv1[:m] - sv2[:m]))) if m else 0.0
    return worst < 1e-10, f"singular value deviation {worst:.3e}"


def check_spectral_norm_bounds(_):
    a = _random_dense(30, 20, 51)
    sigma1 = float(factor.dense_svd_reference(a).singular_values[0])
    op = as_operator(a)
    single = factor.spectral_norm_est(op, tol=1e-10, max_iters=20000, rng=SeededRng(1))
    best = factor.spectral_norm_max_restarts(op, tol=1e-10, max_iters=20000)
    upper_ok = best <= sigma1 * (1 + 1e-8) and single <= sigma1 * (1 + 1e-8)
    lower_ok = best >= (1 - 1e-6) * sigma1
    return upper_ok and lower_ok, (
        f"estimate {best:.12g} vs sigma1 {sigma1:.12g}"
    )


# --------------------------------------------------------------- chebyshev


def check_cheb_recurrence_vs_closed_form(_):
    worst = 0.0
    for q in range(0, 61, 6):
        for x in np.linspace(1.0, 10.0, 40):
            s = math.sqrt(x * x - 1.0)
            closed = 0.5 * ((x + s) ** q + (x - s) ** q)
            t_prev, t_cur = 1.0, x
            if q == 0:
                rec = 1.0
            else:
                for _ in range(q - 1):
                    t_prev, t_cur = t_cur, 2.0 * x * t_cur - t_prev
                rec = t_cur
            worst = max(worst, abs(rec - closed) / max(abs(closed), 1e-300))
    return worst < 1e-9, f"relative disagreement {worst:.3e}"


def check_cheb_monotone_growth(_):
    for alpha, gam, q in ((1.0, 0.25, 9), (2.0, 1.0, 5), (0.5, 0.01, 21)):
        p = ShiftedChebyshev(alpha, gam, q)
        xs = np.geomspace((1 + gam) * alpha, 50 * alpha, 2000)
        vals = np.array([p(x) for x in xs])
        if np.any(np.diff(vals) < -1e-9 * np.abs(vals[1:])):
            return False, f"non-monotone growth at alpha={alpha}, gamma={gam}, q={q}"
    return True, "monotone on all sampled upper grids"


def check_cheb_odd_monomials(_):
    for q in (3, 9, 15):
        coeffs = cheb_coefficients(q)
        top = max(abs(c) for c in coeffs)
        for deg, c in enumerate(coeffs):
            if deg % 2 == 0 and abs(c) > 1e-12 * top:
                return False, f"even-degree coefficient {c} at degree {deg} for q={q}"
    return True, "only odd-degree coefficients present for odd q"


# --------------------------------------------------------------- rsvd


def _suite_matrix():
    spectrum = np.concatenate([np.linspace(3.0, 1.0, 8), 0.5 * 0.9 ** np.arange(22)])
    return synth_matrix(SyntheticSpec(n=40, d=30, spectrum=spectrum, seed=5))


def _need_suite(state):
    if "suite_matrix" not in state:
        raise RuntimeError(
            f"shared suite matrix unavailable ({state.get('setup_error', 'unknown')})"
        )
    return state["suite_matrix"], state["suite_oracle"]


def check_error_function_nonnegative(state):
    a, oracle = _need_suite(state)
    worst = math.inf
    for variant in (Variant.SIMULTANEOUS_ITERATION, Variant.BLOCK_KRYLOV, Variant.SKETCH):
        cfg = RsvdConfig(k=6, variant=variant, q=5, seed=77)
        z = factorize(a, cfg).Z
        for l in range(1, 7):
            worst = min(worst, error_function(a, z, l, oracle))
    return worst >= -1e-9, f"smallest error-function value {worst:.3e}"


def check_ratios_at_least_one(state):
    a, oracle = _need_suite(state)
    low_f, low_s = math.inf, math.inf
    for variant in (Variant.SIMULTANEOUS_ITERATION, Variant.BLOCK_KRYLOV, Variant.SKETCH):
        cfg = RsvdConfig(k=6, variant=variant, q=3, seed=78)
        z = factorize(a, cfg).Z
        low_f = min(low_f, frob_error_ratio(a, z, oracle))
        low_s = min(low_s, spectral_error_ratio(a, z, oracle))
    ok = low_f >= 1 - 1e-10 and low_s >= 1 - 1e-6
    return ok, f"min frobenius ratio {low_f:.12f}, min spectral ratio {low_s:.12f}"


def check_singular_value_upper_bound(state):
    a, oracle = _need_suite(state)
    sv = oracle.singular_values
    worst = -math.inf
    for variant in (Variant.SIMULTANEOUS_ITERATION, Variant.BLOCK_KRYLOV, Variant.SKETCH):
        cfg = RsvdConfig(k=6, variant=variant, q=4, seed=79)
        approx = factorize(a, cfg).approx_singular_values
        for i, s in enumerate(approx):
            worst = max(worst, float(s) - float(sv[i]))
    limit = 1e-8 * float(sv[0])
    return worst <= limit, f"largest overshoot {worst:.3e} (limit {limit:.3e})"


def check_bk_q_monotonicity(state):
    a, oracle = _need_suite(state)
    sv = oracle.singular_values
    slack = 1e-8 * float(sv[0]) ** 2
    prev = None
    for q in (1, 3, 5, 7):
        cfg = RsvdConfig(k=6, variant=Variant.BLOCK_KRYLOV, q=q, seed=80)
        z = factorize(a, cfg).Z
        err = float(np.max(per_vector_errors(a, z, oracle)))
        if prev is not None and err > prev + slack:
            return False, f"per-vector error rose from {prev:.3e} to {err:.3e} at q={q}"
        prev = err
    return True, "per-vector error non-increasing in q on the suite matrix"


def check_q0_equivalence(state):
    a, _ = _need_suite(state)
    results = []
    for variant in (Variant.SIMULTANEOUS_ITERATION, Variant.BLOCK_KRYLOV, Variant.SKETCH):
        cfg = RsvdConfig(k=6, variant=variant, q=0, seed=81)
        results.append(factorize(a, cfg).Z.data)
    if not (np.array_equal(results[0], results[2]) and np.array_equal(results[1], results[2])):
        return False, "q=0 variants disagree"
    return True, "all variants bitwise identical at q=0"


# --------------------------------------------------------------- metrics


def check_frob_identity_vs_direct(state):
    a, oracle = _need_suite(state)
    cfg = RsvdConfig(k=6, variant=Variant.SKETCH, seed=82)
    z = factorize(a, cfg).Z
    ratio = frob_error_ratio(a, z, oracle)
    dense = as_operator(a).densify().data
    resid = dense - z.data @ (z.data.T @ dense)
    tail = math.sqrt(float(np.sum(oracle.singular_values[6:] ** 2)))
    direct = float(np.linalg.norm(resid)) / tail
    rel = abs(ratio - direct) / direct
    return rel < 1e-9, f"identity vs direct relative deviation {rel:.3e}"


def check_per_vector_sign_invariance(state):
    a, oracle = _need_suite(state)
    cfg = RsvdConfig(k=6, variant=Variant.BLOCK_KRYLOV, q=3, seed=83)
    z = factorize(a, cfg).Z.data
    flipped = z * np.where(np.arange(6) % 2 == 0, -1.0, 1.0)[None, :]
    e1 = per_vector_errors(a, z, oracle)
    e2 = per_vector_errors(a, flipped, oracle)
    worst = float(np.max(np.abs(e1 - e2)))
    return worst == 0.0, f"sign-flip deviation {worst:.3e}"


def check_error_function_telescopes(state):
    a, oracle = _need_suite(state)
    sv = oracle.singular_values
    cfg = RsvdConfig(k=6, variant=Variant.SIMULTANEOUS_ITERATION, q=4, seed=84)
    z = factorize(a, cfg).Z
    op = as_operator(a)
    worst = 0.0
    for l in range(1, 7):
        delta = error_function(a, z, l, oracle) - error_function(a, z, l - 1, oracle)
        zl = z.data[:, l - 1 : l]
        direct = float(sv[l - 1] ** 2) - float(np.sum(op.apply_transpose(zl) ** 2))
        worst = max(worst, abs(delta - direct))
    limit = 1e-9 * float(sv[0]) ** 2
    return worst <= limit, f"telescoping deviation {worst:.3e}"


def check_metric_rotation_invariance(state):
    a, oracle = _need_suite(state)
    cfg = RsvdConfig(k=6, variant=Variant.BLOCK_KRYLOV, q=3, seed=85)
    z = factorize(a, cfg).Z
    w = _random_orthogonal(40, 86)
    a_rot = DenseMatrix(w @ as_operator(a).densify().data)
    z_rot = DenseMatrix(w @ z.data)
    r1 = compute_error_report(a, z, oracle)
    r2 = compute_error_report(a_rot, z_rot, oracle)
    dev = max(
        abs(r1.frob_ratio - r2.frob_ratio),
        abs(r1.spectral_ratio - r2.spectral_ratio),
        abs(r1.per_vector_max - r2.per_vector_max),
    )
    return dev < 1e-9, f"worst metric deviation under rotation {dev:.3e}"


# --------------------------------------------------------------- bench


def _tiny_sweep_spec():
    spectrum = np.concatenate([np.linspace(2.0, 1.2, 5), 0.6 * 0.8 ** np.arange(10)])
    return ExperimentSpec(
        algorithms=("si", "bk"),
        k=3,
        seeds=(1, 2, 3),
        q_list=(1, 3),
        synthetic=SyntheticSpec(n=25, d=15, spectrum=spectrum, seed=9),
    )


def check_csv_schema_and_determinism(_):
    spec = _tiny_sweep_spec()
    rows1, _ = run_experiment(spec)
    rows2, _ = run_experiment(spec)
    csv1 = rows_to_csv(rows1)
    header = csv1.splitlines()[0]
    if header != "algo,k,p,q,seed,frob_ratio,spectral_ratio,per_vector_max,wall_ms":
        return False, f"unexpected header: {header}"
    if len(rows1) != 2 * 2 * 3:
        return False, f"expected 12 rows, got {len(rows1)}"

    def strip_wall(rows):
        return [
            {key: val for key, val in row.items() if key != "wall_ms"} for row in rows
        ]

    if strip_wall(rows1) != strip_wall(rows2):
        return False, "rerun differs beyond wall_ms"
    return True, "schema stable and rerun-deterministic excluding wall_ms"


def check_synth_self_check(_):
    spectrum = np.array([3.0, 2.0, 1.0])
    a = synth_matrix(SyntheticSpec(n=6, d=5, spectrum=spectrum, seed=14))
    sv = factor.dense_svd_reference(a).singular_values
    worst = float(np.max(np.abs(sv[:3] - spectrum)))
    return worst < 1e-10 * 3.0, f"spectrum deviation {worst:.3e}"


def check_experiment_preserves_input(_):
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "in.csv")
        from .matrix import write_dense_csv

        a = synth_matrix(
            SyntheticSpec(n=12, d=8, spectrum=np.linspace(2.0, 0.5, 6), seed=15)
        )
        write_dense_csv(a, path)
        with open(path, "rb") as fh:
            before = hashlib.sha256(fh.read()).hexdigest()
        spec = ExperimentSpec(
            algorithms=("sketch",),
            k=2,
            seeds=(1,),
            q_list=(0,),
            input_path=path,
        )
        run_experiment(spec)
        with open(path, "rb") as fh:
            after = hashlib.sha256(fh.read()).hexdigest()
    return before == after, "input file untouched" if before == after else "input mutated"


_CHECKS = (
    ("matrix", "spmm_matches_densified_matmul", check_spmm_matches_densified),
    ("matrix", "matmul_bitwise_deterministic", check_matmul_deterministic),
    ("matrix", "matrix_market_frobenius_accumulation", check_matrix_market_frobenius),
    ("matrix", "gaussian_seed_reproducible", check_gaussian_reproducible),
    ("factor", "qr_orthonormal_including_deficient", check_qr_orthonormal),
    ("factor", "eig_orthogonal_similarity_invariant", check_eig_similarity_invariant),
    ("factor", "eig_reconstruction", check_eig_reconstruction),
    ("factor", "svd_rotation_invariant", check_svd_rotation_invariant),
    ("factor", "spectral_norm_estimate_bounds", check_spectral_norm_bounds),
    ("chebyshev", "recurrence_vs_closed_form", check_cheb_recurrence_vs_closed_form),
    ("chebyshev", "monotone_above_threshold", check_cheb_monotone_growth),
    ("chebyshev", "odd_q_odd_monomials", check_cheb_odd_monomials),
    ("rsvd", "error_function_nonnegative", check_error_function_nonnegative),
    ("rsvd", "ratios_at_least_one", check_ratios_at_least_one),
    ("rsvd", "approx_singular_values_bounded", check_singular_value_upper_bound),
    ("rsvd", "bk_per_vector_monotone_in_q", check_bk_q_monotonicity),
    ("rsvd", "q0_variant_equivalence", check_q0_equivalence),
    ("metrics", "frob_identity_vs_direct", check_frob_identity_vs_direct),
    ("metrics", "per_vector_sign_invariance", check_per_vector_sign_invariance),
    ("metrics", "error_function_telescopes", check_error_function_telescopes),
    ("metrics", "rotation_invariance", check_metric_rotation_invariance),
    ("bench", "csv_schema_and_determinism", check_csv_schema_and_determinism),
    ("bench", "synth_spectrum_self_check", check_synth_self_check),
    ("bench", "experiment_preserves_input", check_experiment_preserves_input),
)


def run_checks():
    """Run every check; returns a list of result dicts."""
    state = {}
    try:
        suite_matrix = _suite_matrix()
        state["suite_matrix"] = suite_matrix
        state["suite_oracle"] = factor.dense_svd_reference(suite_matrix)
    except Exception as exc:  # checks needing the suite report it themselves
        state["setup_error"] = f"{type(exc).__name__}: {exc}"
    results = []
    for module, name, fn in _CHECKS:
        try:
            passed, detail = fn(state)
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(
            {"module": module, "name": name, "passed": bool(passed), "detail": detail}
        )
    return results


def verify_suite():
    """Run the battery; returns a JSON-ready report with overall status."""
    checks = run_checks()
    return {
        "passed": all(c["passed"] for c in checks),
        "backend": backend.active_backend(),
        "checks": checks,
    }
