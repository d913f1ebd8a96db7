import json

import numpy as np
import pytest

import rsvdkit.experiment as experiment
from rsvdkit import (
    ExperimentSpec,
    SyntheticSpec,
    oracle_spectrum,
    rows_to_csv,
    run_experiment,
    synth_matrix,
    write_matrix_market,
)
from rsvdkit.experiment import CSV_COLUMNS, ORACLE_CACHE_ENV
from rsvdkit.matrix import as_operator


def _spec(**overrides):
    base = dict(
        algorithms=("si", "bk"),
        k=3,
        seeds=(1, 2, 3),
        q_list=(1, 3),
        synthetic=SyntheticSpec(
            n=25,
            d=15,
            spectrum=np.concatenate([np.linspace(2.0, 1.2, 5), 0.6 * 0.8 ** np.arange(10)]),
            seed=9,
        ),
    )
    base.update(overrides)
    return ExperimentSpec(**base)


class TestExperimentSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            _spec(algorithms=())
        with pytest.raises(ValueError):
            _spec(seeds=())
        with pytest.raises(ValueError):
            _spec(q_list=(), eps_list=())
        with pytest.raises(ValueError):
            _spec(q_list=(1,), eps_list=(0.5,))
        with pytest.raises(ValueError):
            _spec(oracle_policy="maybe")

    def test_json_roundtrip(self, tmp_path):
        spec = _spec()
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(spec.to_dict()))
        again = ExperimentSpec.from_json(str(path))
        assert again.to_dict() == spec.to_dict()


class TestRunExperiment:
    def test_row_cardinality_and_schema(self):
        rows, summary = run_experiment(_spec())
        assert len(rows) == 2 * 2 * 3
        assert tuple(rows[0].keys()) == CSV_COLUMNS
        header = rows_to_csv(rows).splitlines()[0]
        assert header == "algo,k,p,q,seed,frob_ratio,spectral_ratio,per_vector_max,wall_ms"

    def test_rows_sorted(self):
        rows, _ = run_experiment(_spec())
        keys = [(r["algo"], r["q"], r["seed"]) for r in rows]
        assert keys == sorted(keys)

    def test_rerun_identical_excluding_wall_ms(self):
        rows1, _ = run_experiment(_spec())
        rows2, _ = run_experiment(_spec())
        csv1 = [line.rsplit(",", 1)[0] for line in rows_to_csv(rows1).splitlines()]
        csv2 = [line.rsplit(",", 1)[0] for line in rows_to_csv(rows2).splitlines()]
        assert csv1 == csv2

    def test_summary_contents(self):
        rows, summary = run_experiment(_spec())
        assert summary["shape"] == [25, 15]
        assert len(summary["oracle_top_singular_values"]) == 4  # k + 1
        assert set(summary["medians"].keys()) == {"si", "bk"}
        assert set(summary["medians"]["si"].keys()) == {"1", "3"}
        for stats in summary["medians"]["si"].values():
            assert set(stats.keys()) == {"frob_ratio", "spectral_ratio", "per_vector_max"}

    def test_eps_grid_resolves_per_algorithm(self):
        spec = ExperimentSpec(
            algorithms=("si", "bk"),
            k=3,
            seeds=(1,),
            eps_list=(0.5,),
            synthetic=_spec().synthetic,
        )
        rows, _ = run_experiment(spec)
        qs = {r["algo"]: r["q"] for r in rows}
        assert qs["si"] == 22  # ceil(4 ln(15) / 0.5)
        assert qs["bk"] == 17  # ceil(4 ln(15) / sqrt(0.5)) bumped odd

    def test_bk_dominates_si_at_equal_q_on_small_gap_suite(self):
        # the Krylov method's median spectral ratio is never worse at equal q
        spectrum = np.concatenate([np.full(10, 1.004), 0.97 ** np.arange(140)])
        spec = ExperimentSpec(
            algorithms=("si", "bk"),
            k=10,
            seeds=tuple(range(5)),
            q_list=(5, 9),
            synthetic=SyntheticSpec(n=200, d=150, spectrum=spectrum, seed=31),
        )
        _, summary = run_experiment(spec)
        for q in ("5", "9"):
            si = summary["medians"]["si"][q]["spectral_ratio"]
            bk = summary["medians"]["bk"][q]["spectral_ratio"]
            assert bk <= si

    def test_file_input_matrix_market(self, tmp_path):
        a = synth_matrix(
            SyntheticSpec(n=12, d=8, spectrum=np.linspace(2.0, 0.8, 6), seed=4)
        )
        path = tmp_path / "a.mtx"
        write_matrix_market(a, str(path))
        spec = ExperimentSpec(
            algorithms=("sketch",), k=2, seeds=(5,), q_list=(0,), input_path=str(path)
        )
        rows, summary = run_experiment(spec)
        assert len(rows) == 1
        assert summary["shape"] == [12, 8]


class TestOracleCache:
    def test_cache_roundtrip(self, tmp_path, monkeypatch):
        monkeypatch.setenv(ORACLE_CACHE_ENV, str(tmp_path))
        a = synth_matrix(
            SyntheticSpec(n=10, d=7, spectrum=np.linspace(2.0, 1.0, 5), seed=3)
        )
        op = as_operator(a)
        first = oracle_spectrum(op, policy="cache")
        cached_files = list(tmp_path.glob("oracle-*.json"))
        assert len(cached_files) == 1
        # corrupt-proof: second call must come from the cache file
        calls = []
        real = experiment.dense_svd_reference

        def counting(*args, **kwargs):
            calls.append(1)
            return real(*args, **kwargs)

        monkeypatch.setattr(experiment, "dense_svd_reference", counting)
        second = oracle_spectrum(op, policy="cache")
        assert not calls
        assert np.allclose(first.singular_values, second.singular_values, atol=0)

    def test_compute_policy_ignores_cache(self, tmp_path, monkeypatch):
        monkeypatch.setenv(ORACLE_CACHE_ENV, str(tmp_path))
        a = synth_matrix(
            SyntheticSpec(n=10, d=7, spectrum=np.linspace(2.0, 1.0, 5), seed=3)
        )
        oracle_spectrum(as_operator(a), policy="compute")
        assert not list(tmp_path.glob("oracle-*.json"))

    def test_guard_refuses_without_cache(self, monkeypatch):
        monkeypatch.setattr(experiment, "ORACLE_DIM_LIMIT", 8)
        a = synth_matrix(
            SyntheticSpec(n=10, d=9, spectrum=np.linspace(2.0, 1.0, 5), seed=3)
        )
        with pytest.raises(ValueError, match="cache"):
            oracle_spectrum(as_operator(a), policy="compute")
