import json
import subprocess
import sys

import numpy as np
import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

import socgs
from socgs import bench
from socgs.bench import (
    CSV_COLUMNS,
    ConfigError,
    config_to_dict,
    emit_csv,
    load_config,
    main,
    parse_config,
    read_csv,
    run_experiment,
    strip_elapsed,
    trace_to_csv,
)
from socgs.core import SolveTrace, TraceRecord

QUAD = {
    "problem": {"name": "quadratic", "n": 10, "seed": 0},
    "region": "simplex",
    "algorithms": ["acg", "socgs"],
    "stop": {"max_iterations": 2000, "fw_gap_tolerance": 1e-9},
}


def _write(tmp_path, doc, name="exp.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc) if not isinstance(doc, str) else doc)
    return p


def _trace(n=3, f_opt=True):
    recs = tuple(
        TraceRecord(i, 1.0 / (i + 1), 0.1 ** i, 0.5 ** i if f_opt else None, None, i + 1, i + 1, 0,
                    0.001 * i, "fw")
        for i in range(n)
    )
    return SolveTrace("t", recs)


def test_csv_row_count(tmp_path):
    p = emit_csv(_trace(3), tmp_path / "t.csv")
    lines = p.read_text().splitlines()
    assert len(lines) == 4
    assert lines[0] == ",".join(CSV_COLUMNS)


def test_csv_round_trip(tmp_path):
    tr = _trace(5)
    p = emit_csv(tr, tmp_path / "t.csv")
    back = read_csv(p)
    assert back.records == tr.records
    assert trace_to_csv(back) == p.read_text()


def test_csv_empty_optional_columns(tmp_path):
    p = emit_csv(_trace(3, f_opt=False), tmp_path / "t.csv")
    rows = [line.split(",") for line in p.read_text().splitlines()[1:]]
    j, k = CSV_COLUMNS.index("primal_gap"), CSV_COLUMNS.index("dist_opt")
    assert all(r[j] == "" and r[k] == "" for r in rows)
    assert all(r.primal_gap is None for r in read_csv(p).records)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_floats_round_trip_exactly(values):
    recs = tuple(TraceRecord(i, v, abs(v), v, None, i, i, i, 0.0, "acg") for i, v in enumerate(values))
    text = trace_to_csv(SolveTrace("t", recs))
    import io, csv

    rows = list(csv.DictReader(io.StringIO(text)))
    assert [float(r["f"]) for r in rows] == values


def test_csv_io_error_names_path(tmp_path):
    with pytest.raises(OSError, match="missing"):
        emit_csv(_trace(1), tmp_path / "missing" / "t.csv")


def test_read_csv_bad_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        read_csv(p)


def test_strip_elapsed():
    text = trace_to_csv(_trace(2))
    assert "elapsed_s" not in strip_elapsed(text)
    assert strip_elapsed(text) == trace_to_csv(_trace(2), include_elapsed=False)


# -- configs -------------------------------------------------------------------


def test_config_round_trip():
    cfg = parse_config(QUAD)
    again = parse_config(config_to_dict(cfg))
    assert again == cfg
    assert parse_config(yaml.safe_load(yaml.safe_dump(config_to_dict(cfg)))) == cfg


def test_repo_configs_parse():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    cfgs = sorted(root.glob("*.yaml"))
    assert cfgs
    for p in cfgs:
        cfg = load_config(p)
        assert parse_config(config_to_dict(cfg)) == cfg


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"problem": {"name": "knapsack", "seed": 0}}, "problem.name"),
        ({"problem": {"name": "quadratic", "seed": None}}, "problem.seed"),
        ({"problem": {"name": "quadratic", "n": 0, "seed": 0}}, "problem.n"),
        ({"problem": {"name": "quadratic", "seed": 0, "lam": 0.1}}, "problem.lam"),
        ({"problem": {"name": "logistic", "seed": 0, "lam": -1.0}}, "problem.lam"),
        ({"region": "cube"}, "region"),
        ({"algorithms": []}, "algorithms"),
        ({"algorithms": ["newton"]}, "algorithms[0].kind"),
        ({"algorithms": [{"kind": "socgs", "oracle": "bfgs"}]}, "algorithms[0].oracle"),
        ({"algorithms": [{"kind": "socgs", "n_probe": 0}]}, "algorithms[0].n_probe"),
        ({"algorithms": ["acg", "acg"]}, "algorithms"),
        ({"stop": {"max_iterations": "many"}}, "stop.max_iterations"),
        ({"stop": {"fw_gap_tolerance": -1.0}}, "stop"),
        ({"colour": "blue"}, "colour"),
    ],
)
def test_config_errors_name_the_field(patch, field):
    doc = {**QUAD, **patch}
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert exc.value.field == field


def test_yaml_syntax_error_has_line(tmp_path):
    p = _write(tmp_path, "problem:\n  name: quadratic\n  seed: [0\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(p)


# -- runs ----------------------------------------------------------------------


def test_quadratic_experiment(tmp_path):
    cfg = parse_config(QUAD)
    manifest = run_experiment(cfg, tmp_path)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["acg.csv", "manifest.json", "socgs.csv"]
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk["reference"]["fw_gap"] <= 1e-12
    assert "ACG" in on_disk["reference"]["method"] or "away-step" in on_disk["reference"]["method"]
    assert on_disk["library_version"] == socgs.__version__
    assert on_disk["seed"] == 0
    assert manifest["results"]["socgs"]["converged"]
    for name in ("acg", "socgs"):
        tr = read_csv(tmp_path / f"{name}.csv")
        assert abs(tr.final.f - on_disk["reference"]["f_opt"]) <= 1e-9
    soc = read_csv(tmp_path / "socgs.csv")
    assert all(r.hessian_calls == r.iter for r in soc.records)


def test_same_seed_traces_byte_match(tmp_path):
    cfg = parse_config(QUAD)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in ("acg.csv", "socgs.csv"):
        a = (tmp_path / "a" / name).read_text()
        b = (tmp_path / "b" / name).read_text()
        assert strip_elapsed(a) == strip_elapsed(b)


def test_different_seed_differs(tmp_path):
    run_experiment(parse_config(QUAD), tmp_path / "a")
    other = {**QUAD, "problem": {**QUAD["problem"], "seed": 1}}
    run_experiment(parse_config(other), tmp_path / "b")
    a = strip_elapsed((tmp_path / "a" / "acg.csv").read_text())
    assert a != strip_elapsed((tmp_path / "b" / "acg.csv").read_text())


def test_main_exit_codes(tmp_path, capsys):
    bad = _write(tmp_path, {**QUAD, "problem": {"name": "knapsack", "seed": 0}})
    assert main(["run", str(bad)]) == 2
    assert "problem.name" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "nope.yaml")]) == 2
    good = _write(tmp_path, QUAD, "good.yaml")
    assert main(["run", str(good), "--out", str(tmp_path / "o"), "--audit"]) == 0
    assert (tmp_path / "o" / "manifest.json").exists()


def test_solver_failure_exit_3(tmp_path, capsys, monkeypatch):
    real = bench.run_algorithm

    def flaky(spec, *args, **kw):
        if spec.name == "socgs":
            raise FloatingPointError("boom")
        return real(spec, *args, **kw)

    monkeypatch.setattr(bench, "run_algorithm", flaky)
    good = _write(tmp_path, QUAD)
    assert main(["run", str(good), "--out", str(tmp_path / "o")]) == 3
    err = capsys.readouterr().err
    assert "'socgs'" in err and "boom" in err


def test_env_var_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(bench.OUT_ENV, str(tmp_path / "env_out"))
    good = _write(tmp_path, {**QUAD, "output": str(tmp_path / "cfg_out")})
    assert main(["run", str(good)]) == 0
    assert (tmp_path / "env_out" / "acg.csv").exists()
    assert main(["run", str(good), "--out", str(tmp_path / "cli_out")]) == 0
    assert (tmp_path / "cli_out" / "acg.csv").exists()
    assert not (tmp_path / "cfg_out").exists()


def test_logistic_data_file(tmp_path):
    rng = np.random.default_rng(0)
    lines = []
    for i in range(30):
        z = rng.standard_normal(5)
        lab = 1 if z[0] + 0.3 * rng.standard_normal() > 0 else -1
        lines.append(f"{lab:+d} " + " ".join(f"{j + 1}:{float(v)!r}" for j, v in enumerate(z) if abs(v) > 0.3))
    data = tmp_path / "train.txt"
    data.write_text("\n".join(lines) + "\n")
    doc = {"problem": {"name": "logistic", "n": 5, "data": str(data), "seed": None},
           "algorithms": ["acg"], "stop": {"fw_gap_tolerance": 1e-8}}
    manifest = run_experiment(parse_config(doc), tmp_path / "o")
    assert manifest["results"]["acg"]["converged"]


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "socgs.bench", "version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == socgs.__version__
    out = subprocess.run([sys.executable, "-m", "socgs.bench", "list-problems"], capture_output=True, text=True)
    assert [line.split("\t")[0] for line in out.stdout.splitlines()] == ["quadratic", "sparse_coding", "logistic"]
