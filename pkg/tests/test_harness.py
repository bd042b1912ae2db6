import json

import numpy as np
import pytest
from click.testing import CliRunner

from tsbench.clustering.methods import METHODS
from tsbench.core import LabeledDataset, dataset_paths, write_ucr_file
from tsbench.errors import MissingMethod
from tsbench.harness import (
    BenchmarkConfig,
    ResultStore,
    ScoreRecord,
    baseline_csv,
    export_scores,
    import_scores,
    phase_report,
    random_baseline,
    run_benchmark,
    write_report,
)
from tsbench.harness import runner as runner_mod
from tsbench.harness.cli import main
from tsbench.harness.store import format_value, records_from_csv, records_to_csv


def make_dataset(name, n_per=5, n=24, seed=0, classes=3):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 1, n)
    protos = [np.sin(2 * np.pi * t), np.where(t < 0.5, 1.0, -1.0), np.exp(-((t - 0.5) ** 2) / 0.01)]
    X = np.vstack([protos[c] + 0.2 * rng.standard_normal((n_per, n)) for c in range(classes)])
    labels = [str(c + 1) for c in range(classes) for _ in range(n_per)]
    return LabeledDataset.from_arrays(name, X, labels)


def add_to_archive(root, ds, split=True):
    train, test = dataset_paths(root, ds.name)
    train.parent.mkdir(parents=True)
    if not split:
        write_ucr_file(train, ds)
        return
    idx = np.arange(len(ds))
    write_ucr_file(train, LabeledDataset.from_arrays(ds.name, ds.X[idx % 2 == 0], np.array(ds.labels)[idx % 2 == 0]))
    write_ucr_file(test, LabeledDataset.from_arrays(ds.name, ds.X[idx % 2 == 1], np.array(ds.labels)[idx % 2 == 1]))


@pytest.fixture
def archive(tmp_path):
    root = tmp_path / "archive"
    root.mkdir()
    add_to_archive(root, make_dataset("Alpha", seed=1))
    add_to_archive(root, make_dataset("Beta", seed=2, n=20))
    add_to_archive(root, make_dataset("Solo", classes=1), split=False)
    return root


def config(archive, out, **kw):
    kw.setdefault("runs", 2)
    return BenchmarkConfig(archive_dir=archive, output_dir=out, **kw)


# ---- config and store


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        config(tmp_path, tmp_path, methods=())
    with pytest.raises(ValueError):
        config(tmp_path, tmp_path, methods=("kmeans_sbd_dba",))
    with pytest.raises(ValueError):
        config(tmp_path, tmp_path, runs=0)
    with pytest.raises(ValueError):
        config(tmp_path, tmp_path, merge_policy="both")
    a = config(tmp_path, tmp_path / "a", threads=1)
    b = config(tmp_path, tmp_path / "b", threads=4)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != config(tmp_path, tmp_path, base_seed=1).config_hash()


def test_single_record_csv():
    text = records_to_csv([ScoreRecord("D", "kmeans_euc", "ari", 0.25, 10, 0)])
    assert text == "dataset,method,measure,value,runs,seed_base\nD,kmeans_euc,ari,0.250000,10,0\n"


def test_negative_zero_and_precision():
    assert format_value(-1e-9) == "0.000000"
    rng = np.random.default_rng(0)
    values = rng.uniform(-1, 1, 200)
    recs = [ScoreRecord(f"d{i:03d}", "m", "ari", v, 1, 0) for i, v in enumerate(values)]
    back = records_from_csv(records_to_csv(recs))
    assert max(abs(a.value - b.value) for a, b in zip(recs, back)) < 5e-7


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_export_import_round_trip(tmp_path, fmt):
    recs = [ScoreRecord(d, m, s, v, r, 3) for d, m, s, v, r in
            [("b", "x", "ari", 0.5, 10), ("a", "y", "rand", -0.125, 1), ("a", "x", "ami", 0.333333, 10)]]
    path = export_scores(recs, tmp_path / f"s.{fmt}", fmt)
    back = import_scores(path)
    assert back == sorted(recs, key=lambda r: r.key)
    assert export_scores(back, tmp_path / f"t.{fmt}", fmt).read_bytes() == path.read_bytes()
    if fmt == "json":
        assert [row["dataset"] for row in json.loads(path.read_text())] == ["a", "a", "b"]


def test_store_rejects_duplicates_and_reports_missing():
    r = ScoreRecord("d", "kmeans_euc", "ari", 0.1, 1, 0)
    with pytest.raises(ValueError):
        ResultStore([r, r])
    with pytest.raises(MissingMethod) as err:
        ResultStore([r]).aligned(["kmeans_euc", "agglo_euc", "cmeans_euc"])
    assert err.value.methods == ["agglo_euc", "cmeans_euc"]
    with pytest.raises(ValueError):
        ScoreRecord("d", "m", "accuracy", 0.1, 1, 0)


# ---- runner


def test_empty_archive(tmp_path):
    (tmp_path / "empty").mkdir()
    result = run_benchmark(config(tmp_path / "empty", tmp_path / "out"))
    assert len(result.store) == 0 and result.exit_code == 0
    assert (tmp_path / "out" / "scores.csv").read_text() == "dataset,method,measure,value,runs,seed_base\n"


def test_missing_archive_is_fatal(tmp_path):
    with pytest.raises(FileNotFoundError):
        run_benchmark(config(tmp_path / "nowhere", tmp_path / "out"))


def test_full_sweep(archive, tmp_path):
    result = run_benchmark(config(archive, tmp_path / "out", datasets=("Alpha",)))
    assert len(result.store) == 48
    assert result.exit_code == 0
    runs = {r.method: r.runs for r in result.store.records}
    assert runs == {m: 1 if s.deterministic else 2 for m, s in METHODS.items()}
    # well-separated shapes: the Euclidean methods recover the classes
    ari = result.store.vector("agglo_euc")
    assert ari["Alpha"] == 1.0
    out = tmp_path / "out"
    for name in ("scores.csv", "scores.json", "status.csv", "manifest.json"):
        assert (out / name).is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["datasets"]["Alpha"] == {"n_obs": 15, "length": 24, "k": 3, "admissible": True, "reasons": []}
    assert set(manifest["versions"]) >= {"tsbench", "numpy", "numba"}


def test_skipped_dataset_has_status_rows(archive, tmp_path):
    result = run_benchmark(config(archive, tmp_path / "out", methods=("kmeans_euc", "agglo_euc")))
    solo = [row for row in result.store.status if row["dataset"] == "Solo"]
    assert [row["status"] for row in solo] == ["skipped", "skipped"]
    assert solo[0]["message"] == "single_class"
    assert set(result.store.datasets()) == {"Alpha", "Beta"}


def test_rerun_and_thread_count_byte_identical(archive, tmp_path):
    methods = ("kmeans_euc", "kmedoids_euc", "kmeans_dtw", "dpeaks_euc", "dpeaks_dtw")
    outs = []
    for i, threads in enumerate((1, 1, 3)):
        out = tmp_path / f"out{i}"
        run_benchmark(config(archive, out, methods=methods, threads=threads, cache_dir=tmp_path / "cache"))
        outs.append(out)
    for name in ("scores.csv", "scores.json", "status.csv"):
        blobs = {(o / name).read_bytes() for o in outs}
        assert len(blobs) == 1, name


def test_matrix_cache_reused(archive, tmp_path):
    cache = tmp_path / "cache"
    run_benchmark(config(archive, tmp_path / "a", methods=("kmedoids_euc",), cache_dir=cache))
    files = sorted(p.name for p in cache.glob("*.tsdm"))
    assert len(files) == 2
    mtimes = {p: p.stat().st_mtime_ns for p in cache.glob("*.tsdm")}
    run_benchmark(config(archive, tmp_path / "b", methods=("kmedoids_euc", "dpeaks_euc"), cache_dir=cache))
    assert {p: p.stat().st_mtime_ns for p in cache.glob("*.tsdm")} == mtimes


def test_failures_are_isolated(archive, tmp_path, monkeypatch):
    real = runner_mod.run_method

    def flaky(name, X, k, *args):
        if name == "kmeans_euc" and X.shape[1] == 20:
            raise RuntimeError("boom")
        return real(name, X, k, *args)

    monkeypatch.setattr(runner_mod, "run_method", flaky)
    result = run_benchmark(config(archive, tmp_path / "out", methods=("kmeans_euc", "agglo_euc")))
    assert result.exit_code == 2
    failed = [row for row in result.store.status if row["status"] == "failed"]
    assert [(r["dataset"], r["method"]) for r in failed] == [("Beta", "kmeans_euc")]
    assert "boom" in failed[0]["message"]
    assert len(result.store) == 3 * 6


# ---- reports


def synthetic_store():
    scores = {
        "kmeans_euc": [0.9, 0.5, 0.01, 0.3],
        "cmeans_euc": [0.8, 0.6, 0.02, 0.3],
        "kmedoids_euc": [0.1, 0.4, 0.03, 0.2],
    }
    recs = [ScoreRecord(f"d{i}", m, "ari", v, 10, 0) for m, vs in scores.items() for i, v in enumerate(vs)]
    return ResultStore(recs), scores


def test_phase2_report():
    store, scores = synthetic_store()
    rep = phase_report(store, 2)
    assert rep["n_datasets"] == 4
    assert rep["winning_counts"] == {"kmeans_euc": 1, "cmeans_euc": 1, "kmedoids_euc": 0}
    assert phase_report(store, 2, ties="shared")["winning_counts"]["kmeans_euc"] == 2
    pair = rep["pairwise"][0]
    assert pair["methods"] == ["kmeans_euc", "cmeans_euc"]
    assert pair["spread"] == pytest.approx((0.01 + 0.01 + 0.0001 + 0) / 4)
    assert rep["scatter"]["kmeans_euc__cmeans_euc"][0] == ["d0", 0.9, 0.8]


def test_phase1_ranking_and_missing():
    store, _ = synthetic_store()
    with pytest.raises(MissingMethod):
        phase_report(store, 1)
    with pytest.raises(ValueError):
        phase_report(store, 7)


def test_write_report(tmp_path):
    store, _ = synthetic_store()
    files = write_report(phase_report(store, 2), tmp_path)
    names = sorted(p.name for p in files)
    assert "phase2.json" in names and "phase2.txt" in names
    assert len([n for n in names if "scatter" in n]) == 3
    lines = (tmp_path / "phase2_scatter_kmeans_euc__cmeans_euc.csv").read_text().splitlines()
    assert lines[0] == "dataset,kmeans_euc,cmeans_euc" and lines[1] == "d0,0.900000,0.800000"


# ---- baseline


def test_random_baseline_chance_level():
    rows = random_baseline(500, range(2, 7), trials=30, seed=1)
    assert [r["k"] for r in rows] == [2, 3, 4, 5, 6]
    assert all(abs(r["ari"]) < 0.02 and abs(r["ami"]) < 0.02 for r in rows)
    rand = [r["rand"] for r in rows]
    assert rand[-1] - rand[0] > 0.1


def test_random_baseline_homogeneity_increases_with_k():
    for truth_k in (None, 3):
        rows = random_baseline(1000, range(2, 11), trials=100, seed=0, truth_k=truth_k)
        h = [r["homogeneity"] for r in rows]
        assert all(b > a for a, b in zip(h, h[1:])), h


def test_baseline_csv_and_validation():
    text = baseline_csv(random_baseline(50, [2], trials=2))
    assert text.splitlines()[0] == "k,ari,rand,ami,fowlkes_mallows,homogeneity,completeness"
    with pytest.raises(ValueError):
        random_baseline(10, [1])


# ---- cli


def test_cli_run_report_scores(archive, tmp_path, monkeypatch):
    monkeypatch.setenv("BENCH_ARCHIVE_DIR", str(archive))
    runner = CliRunner()
    out = tmp_path / "out"
    res = runner.invoke(main, ["run", "--methods", "kmeans_euc,cmeans_euc,kmedoids_euc", "--runs", "2",
                               "--out", str(out)])
    assert res.exit_code == 0, res.output
    res = runner.invoke(main, ["report", "--phase", "2", "--store", str(out), "--out", str(tmp_path / "rep")])
    assert res.exit_code == 0, res.output
    assert "winning counts" in res.output
    assert (tmp_path / "rep" / "phase2.json").is_file()
    res = runner.invoke(main, ["report", "--phase", "1", "--store", str(out)])
    assert res.exit_code == 1
    assert "agglo_euc" in res.output
    res = runner.invoke(main, ["scores", "--format", "json", "--store", str(out)])
    assert res.exit_code == 0
    assert len(json.loads(res.output)) == 2 * 3 * 6
    res = runner.invoke(main, ["scores", "--store", str(out)])
    assert res.output == (out / "scores.csv").read_text()


def test_cli_exit_codes(archive, tmp_path, monkeypatch):
    runner = CliRunner()
    res = runner.invoke(main, ["run", "--archive-dir", str(tmp_path / "missing"), "--out", str(tmp_path / "o")])
    assert res.exit_code == 1
    monkeypatch.setattr(runner_mod, "run_method", lambda *a: (_ for _ in ()).throw(RuntimeError("x")))
    res = runner.invoke(main, ["run", "--archive-dir", str(archive), "--methods", "agglo_euc",
                               "--out", str(tmp_path / "o")])
    assert res.exit_code == 2


def test_cli_baseline(tmp_path):
    res = CliRunner().invoke(main, ["baseline", "--points", "100", "--k-min", "2", "--k-max", "4", "--trials", "3"])
    assert res.exit_code == 0
    assert len(res.output.splitlines()) == 4
