"""Scenario parsing, sweep runner, presets, aggregation, plots, CLI."""

import zlib

import numpy as np
import pytest

import signrip as sr
from signrip.experiments import (
    ResultTable,
    Scenario,
    ScenarioError,
    aggregate,
    apply_overrides,
    canned,
    component_seed,
    derive_seed,
    emit_plots,
    load_scenario,
    parse_scenario,
    preset_names,
    run_scenario,
)
from signrip.experiments.cli import OUTPUT_ENV, main
from signrip.experiments.runner import QDEV_COLUMNS, RIP_COLUMNS, SOLVE_COLUMNS


def _tiny_raw(**over):
    raw = {
        "name": "tiny",
        "d": 6,
        "m": [40, 60],
        "noise": {"p": [0.0, 0.1], "dist": "gaussian", "scale": 5.0},
        "init": {"kind": "spectral", "alpha": 0.1},
        "solvers": [
            {
                "label": "sg",
                "algorithm": "subgd",
                "r_prime": 1,
                "policy": {"kind": "qnorm_geometric", "eta0": 0.4, "rho": 0.9},
                "iters": 20,
            }
        ],
        "trials": 2,
        "base_seed": 11,
    }
    raw.update(over)
    return raw


# ---------------------------------------------------------------------- seeds


def test_seed_derivation_formula():
    # row seed is CRC32 of "base|coords" XOR trial, masked to 31 bits
    cell = zlib.crc32(b"11|d=6|m=40")
    assert derive_seed(11, "d=6|m=40", 0) == cell & 0x7FFFFFFF
    assert derive_seed(11, "d=6|m=40", 3) == (cell ^ 3) & 0x7FFFFFFF
    assert derive_seed(11, "d=6|m=40", 0) != derive_seed(12, "d=6|m=40", 0)


def test_component_seed_formula():
    assert component_seed(1234, "truth") == zlib.crc32(b"1234|truth") & 0x7FFFFFFF
    tags = ["truth", "ensemble", "noise", "init", "probes"]
    assert len({component_seed(1234, t) for t in tags}) == len(tags)


# -------------------------------------------------------------------- parsing


def test_parse_minimal_solve():
    s = parse_scenario(_tiny_raw())
    assert s.kind == "solve"
    assert s.d == (6,) and s.m == (40, 60)
    assert s.noise_p == (0.0, 0.1)
    assert s.noise_cases == (("gaussian", 5.0),)
    assert s.solvers[0].policy == sr.QNormGeometric(0.4, 0.9)
    assert s.init == sr.Spectral(alpha=0.1)


def test_parse_error_messages_name_fields():
    cases = [
        ({"name": "x", "bogus": 1}, "bogus"),
        (_tiny_raw(kind="nope"), "kind"),
        (_tiny_raw(noise={"p": 1.5}), "noise.p"),
        (_tiny_raw(noise={"dist": "weird"}), "noise.dist"),
        (_tiny_raw(noise={"cases": [{"dist": "gaussian"}], "dist": "gaussian"}), "noise"),
        (_tiny_raw(trials=0), "trials"),
        (_tiny_raw(r_star=7), "r_star"),
        (_tiny_raw(d=[]), "d"),
        (_tiny_raw(d=-3), "d"),
        (_tiny_raw(variant="other"), "variant"),
        (_tiny_raw(solvers=[]), "solvers"),
        ({"name": "x", "kind": "rip", "certifiers": ["magic"]}, "certifiers"),
        ({"name": "x", "kind": "rip", "d": 4, "rank": 9}, "rank"),
    ]
    for raw, needle in cases:
        with pytest.raises(ScenarioError, match=needle):
            parse_scenario(raw)


def test_parse_solver_errors():
    bad_policy = _tiny_raw()
    bad_policy["solvers"][0]["policy"] = {"kind": "warp"}
    with pytest.raises(ScenarioError, match="policy"):
        parse_scenario(bad_policy)
    missing_field = _tiny_raw()
    missing_field["solvers"][0]["policy"] = {"kind": "geometric", "eta0": 0.3}
    with pytest.raises(ScenarioError, match="rho"):
        parse_scenario(missing_field)
    extra_field = _tiny_raw()
    extra_field["solvers"][0]["policy"] = {"kind": "constant", "eta0": 0.3, "rho": 0.9}
    with pytest.raises(ScenarioError, match="rho"):
        parse_scenario(extra_field)
    big_rank = _tiny_raw()
    big_rank["solvers"][0]["r_prime"] = 7
    with pytest.raises(ScenarioError, match="r_prime"):
        parse_scenario(big_rank)
    no_iters = _tiny_raw()
    del no_iters["solvers"][0]["iters"]
    with pytest.raises(ScenarioError, match="iters"):
        parse_scenario(no_iters)


def test_parse_r_prime_d_resolves():
    raw = _tiny_raw()
    raw["solvers"][0]["r_prime"] = "d"
    s = parse_scenario(raw)
    assert s.solvers[0].resolve_r_prime(6) == 6


def test_parse_paired_noise_cases():
    raw = _tiny_raw(noise={"p": 0.1, "cases": [
        {"dist": "gaussian", "scale": 10}, {"dist": "cauchy", "scale": 2}]})
    s = parse_scenario(raw)
    assert s.noise_cases == (("gaussian", 10.0), ("cauchy", 2.0))


def test_grid_cells_order():
    s = parse_scenario(_tiny_raw(d=[4, 6]))
    cells = s.grid_cells()
    # d is the outermost axis, then m, then p
    assert [(c["d"], c["m"], c["p"]) for c in cells] == [
        (4, 40, 0.0), (4, 40, 0.1), (4, 60, 0.0), (4, 60, 0.1),
        (6, 40, 0.0), (6, 40, 0.1), (6, 60, 0.0), (6, 60, 0.1),
    ]


def test_load_scenario_yaml_file(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text("name: fromfile\nd: 5\nm: 30\nsolvers:\n"
                    "  - {label: a, iters: 5, policy: {kind: constant, eta0: 0.1}}\n")
    s = load_scenario(path)
    assert s.name == "fromfile"
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: [unclosed\n")
    with pytest.raises(ScenarioError):
        load_scenario(bad)
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    with pytest.raises(ScenarioError, match="empty"):
        load_scenario(empty)


# ------------------------------------------------------------------ overrides


def test_apply_overrides_paths():
    raw = _tiny_raw()
    out = apply_overrides(raw, [
        "trials=5",
        "noise.p=[0.2,0.4]",
        "solvers.0.iters=7",
        "m=80,120",
        "name=renamed",
    ])
    s = parse_scenario(out)
    assert s.trials == 5
    assert s.noise_p == (0.2, 0.4)
    assert s.solvers[0].iters == 7
    assert s.m == (80, 120)
    assert s.name == "renamed"


def test_apply_overrides_errors():
    with pytest.raises(ScenarioError, match="key=value"):
        apply_overrides(_tiny_raw(), ["trials"])
    with pytest.raises(ScenarioError, match="no such field"):
        apply_overrides(_tiny_raw(), ["noise.missing.deep=1"])
    with pytest.raises(ScenarioError, match="cannot set"):
        apply_overrides(_tiny_raw(), ["solvers.9=1"])


# --------------------------------------------------------------------- runner


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny")
    s = parse_scenario(_tiny_raw())
    table = run_scenario(s, out_dir=out)
    return s, table, out


def test_run_scenario_shape(tiny_run):
    s, table, out = tiny_run
    assert table.columns == SOLVE_COLUMNS
    assert len(table.rows) == 2 * 2 * 1 * 2  # m-axis x p-axis x solver x trials
    assert all(r["status"] == "ok" for r in table.rows)
    assert all(np.isfinite(r["final_err"]) for r in table.rows)
    assert (out / "tiny.csv").exists()


def test_run_scenario_csv_layout(tiny_run):
    s, table, out = tiny_run
    lines = (out / "tiny.csv").read_text().splitlines()
    assert lines[0].startswith("# generated ")
    assert lines[1] == ",".join(SOLVE_COLUMNS)
    assert len(lines) == 2 + len(table.rows)
    # file is sorted on grid coordinates, matching the returned table
    parsed = ResultTable.from_csv(out / "tiny.csv")
    assert [r["seed"] for r in parsed.rows] == [r["seed"] for r in table.rows]


def test_run_scenario_row_regenerates_in_isolation(tiny_run):
    # any row can be reproduced from its seed alone, without the sweep
    s, table, out = tiny_run
    row = table.rows[-1]
    truth = sr.gen_ground_truth(row["d"], 1, seed=component_seed(row["seed"], "truth"))
    ens = sr.gen_ensemble(row["d"], row["m"], seed=component_seed(row["seed"], "ensemble"))
    spec = sr.NoiseSpec(p=row["p"], dist=row["dist"], scale=row["scale"],
                        seed=component_seed(row["seed"], "noise"))
    y = sr.measure(ens, truth, sr.gen_noise(row["m"], spec))
    u0 = sr.make_init(s.init, ens, y, row["r_prime"], seed=component_seed(row["seed"], "init"))
    _, rec = sr.subgd(ens, y, u0, s.solvers[0].policy, row["iters"], truth=truth)
    assert rec.final("err_frob") == pytest.approx(row["final_err"], rel=1e-9)
    assert rec.final("loss_l1") == pytest.approx(row["final_loss_l1"], rel=1e-9)


def test_run_scenario_rerun_identical_minus_timestamp(tiny_run, tmp_path):
    s, table, out = tiny_run
    run_scenario(s, out_dir=tmp_path)
    first = (out / "tiny.csv").read_text().splitlines()[1:]
    second = (tmp_path / "tiny.csv").read_text().splitlines()[1:]
    assert first == second


def test_run_scenario_seeds_survive_axis_reordering(tiny_run, tmp_path):
    # seeds hash grid coordinates, not cell position, so reordering an
    # axis list cannot silently change any row's data
    s, table, _ = tiny_run
    flipped = parse_scenario(_tiny_raw(m=[60, 40]))
    t2 = run_scenario(flipped, out_dir=tmp_path)
    key = lambda r: (r["m"], r["p"], r["trial"])
    by_key = {key(r): r for r in t2.rows}
    for row in table.rows:
        other = by_key[key(row)]
        assert other["seed"] == row["seed"]
        assert other["final_err"] == pytest.approx(row["final_err"], rel=1e-12)


def test_run_scenario_trace_files(tmp_path):
    raw = _tiny_raw(m=40, trials=1, trace=True)
    raw["noise"]["p"] = 0.1
    table = run_scenario(parse_scenario(raw), out_dir=tmp_path)
    traces = sorted((tmp_path / "traces").glob("*.csv"))
    assert len(traces) == 1
    assert traces[0].name == "tiny_c000_sg_t0.csv"
    lines = traces[0].read_text().splitlines()
    assert lines[0].startswith("t,eta_t,loss_l1")
    assert len(lines) == 1 + 21  # header + iters+1 rows


def test_run_scenario_failure_becomes_flagged_row(tmp_path, monkeypatch):
    import signrip.experiments.runner as runner_mod

    real = runner_mod.subgd

    def flaky(ens, y, u0, policy, iters, **kw):
        if ens.m == 60:
            raise RuntimeError("boom")
        return real(ens, y, u0, policy, iters, **kw)

    monkeypatch.setattr(runner_mod, "subgd", flaky)
    table = run_scenario(parse_scenario(_tiny_raw(trials=1)), out_dir=tmp_path)
    status = {(r["m"], r["p"]): r["status"] for r in table.rows}
    assert status[(40, 0.0)] == "ok" and status[(40, 0.1)] == "ok"
    assert status[(60, 0.0)] == "failed:RuntimeError"
    failed = [r for r in table.rows if r["status"] != "ok"]
    assert all(np.isnan(r["final_err"]) for r in failed)
    # failed rows still land in the CSV
    parsed = ResultTable.from_csv(tmp_path / "tiny.csv")
    assert sum(1 for r in parsed.rows if str(r["status"]).startswith("failed")) == 2


def test_run_scenario_rip_kind(tmp_path):
    raw = {
        "name": "rip-tiny", "kind": "rip", "d": 6, "m": 150,
        "rank": [1], "certifiers": ["sign", "l2"], "n_samples": 25,
        "noise": {"p": 0.0}, "trials": 1, "base_seed": 5,
    }
    table = run_scenario(parse_scenario(raw), out_dir=tmp_path)
    assert table.columns == RIP_COLUMNS
    assert sorted(r["kind"] for r in table.rows) == ["L2", "Sign"]
    assert all(0 <= r["delta_hat"] for r in table.rows)
    assert all(r["status"] == "ok" for r in table.rows)


def test_run_scenario_qdev_kind(tmp_path):
    raw = {
        "name": "qdev-tiny", "kind": "qdev", "d": 6, "m": 200,
        "noise": {"p": 0.1, "dist": "gaussian", "scale": 3.0},
        "n_samples": 25, "trials": 2, "base_seed": 5,
    }
    table = run_scenario(parse_scenario(raw), out_dir=tmp_path)
    assert table.columns == QDEV_COLUMNS
    assert len(table.rows) == 2
    assert all(r["deviation"] > 0 and r["noise_only"] > 0 for r in table.rows)


# -------------------------------------------------------------------- presets


def test_preset_catalog():
    assert preset_names() == [
        "dim-vs-m", "heatmap-mp", "noise-magnitude", "noise-types",
        "prop1-demo", "recovery-curves", "rip-estimation", "stepsize-compare",
    ]
    for name in preset_names():
        s = canned(name)  # every preset parses cleanly
        assert isinstance(s, Scenario)


def test_preset_contents_spotchecks():
    nm = canned("noise-magnitude")
    assert nm.d == (50,) and nm.m == (500,)
    assert nm.noise_cases == (("gaussian", 10.0), ("gaussian", 100.0), ("gaussian", 1000.0))
    hm = canned("heatmap-mp")
    assert hm.solvers[0].policy == sr.QNormGeometric(0.4, 0.98)
    assert hm.m == (400, 800, 1600) and hm.noise_p == (0.1, 0.3, 0.5)
    rc = canned("recovery-curves")
    labels = [sv.label for sv in rc.solvers]
    assert labels == ["subgd-exact", "subgd-over", "gd-over"]
    assert rc.solvers[1].r_prime == "d"
    assert rc.solvers[2].algorithm == "gd"
    rip = canned("rip-estimation")
    assert rip.kind == "rip" and set(rip.certifiers) == {"sign", "l2", "l1l2"}
    pd = canned("prop1-demo")
    assert pd.kind == "qdev"


def test_preset_noise_types_matched_variance():
    # every finite-variance case is tuned to variance 100; cauchy has none
    nt = canned("noise-types")
    for dist, scale in nt.noise_cases:
        spec = sr.NoiseSpec(p=0.1, dist=dist, scale=scale, seed=0)
        if dist == "cauchy":
            assert spec.heavy_tailed
            with pytest.raises(ValueError):
                spec.variance
        else:
            assert spec.variance == pytest.approx(100.0, rel=1e-6)


def test_preset_unknown_name_lists_valid():
    with pytest.raises(ScenarioError, match="recovery-curves"):
        canned("no-such-preset")


def test_preset_overrides_roundtrip():
    s = canned("recovery-curves", ["trials=1", "solvers.0.iters=10"])
    assert s.trials == 1
    assert s.solvers[0].iters == 10


# ----------------------------------------------------- tables and aggregation


def test_result_table_roundtrip(tmp_path):
    table = ResultTable(
        columns=("a", "b", "c"),
        rows=[{"a": 1, "b": 2.5, "c": "x"}, {"a": 2, "b": float("nan"), "c": "y"}],
    )
    path = tmp_path / "t.csv"
    table.to_csv(path)
    back = ResultTable.from_csv(path)
    assert back.columns == table.columns
    assert back.rows[0] == {"a": 1, "b": 2.5, "c": "x"}
    assert back.rows[1]["a"] == 2 and np.isnan(back.rows[1]["b"])
    assert back.column("c") == ["x", "y"]


def test_aggregate_hand_check():
    rows = [
        {"g": "a", "v": 1.0, "status": "ok"},
        {"g": "a", "v": 2.0, "status": "ok"},
        {"g": "a", "v": 10.0, "status": "ok"},
        {"g": "a", "v": 999.0, "status": "failed:RuntimeError"},
        {"g": "a", "v": float("nan"), "status": "ok"},
        {"g": "b", "v": 7.0, "status": "ok"},
    ]
    table = ResultTable(columns=("g", "v", "status"), rows=rows)
    agg = aggregate(table, "v", by=("g",))
    assert len(agg) == 2
    a = agg[0]
    assert a["g"] == "a" and a["n"] == 3
    assert a["median"] == 2.0 and a["q25"] == 1.5 and a["q75"] == 6.0
    assert agg[1] == {"g": "b", "n": 1, "median": 7.0, "q25": 7.0, "q75": 7.0}


# ---------------------------------------------------------------------- plots


def test_emit_plots_line(tiny_run, tmp_path):
    _, table, _ = tiny_run
    written = emit_plots(table, "line", tmp_path)
    names = sorted(p.name for p in written)
    assert names == ["tiny_line.csv", "tiny_line.svg"]
    header = (tmp_path / "tiny_line.csv").read_text().splitlines()[0]
    assert header == "solver,r_prime,m,n,median,q25,q75"


def test_emit_plots_heatmap(tiny_run, tmp_path):
    _, table, _ = tiny_run
    written = emit_plots(table, "heatmap", tmp_path)  # m and p both vary
    names = sorted(p.name for p in written)
    assert names == ["tiny_sg_heatmap.csv", "tiny_sg_heatmap.svg"]


def test_emit_plots_heatmap_fallback_warns(tiny_run, tmp_path):
    _, table, _ = tiny_run
    single = ResultTable(columns=table.columns,
                         rows=[r for r in table.rows if r["m"] == 40 and r["p"] == 0.0])
    with pytest.warns(UserWarning, match="falling back"):
        written = emit_plots(single, "heatmap", tmp_path)
    assert any(p.name.endswith("_line.svg") for p in written)


def test_emit_plots_trace(tmp_path):
    truth = sr.gen_ground_truth(5, 1, seed=30)
    ens = sr.gen_ensemble(5, 80, seed=31)
    y = sr.measure(ens, truth)
    u0 = sr.spectral_init(ens, y, 1, 0.1)
    _, rec = sr.subgd(ens, y, u0, sr.Constant(0.05), 10, truth=truth)
    rec.to_csv(tmp_path / "trace.csv")
    table = ResultTable.from_csv(tmp_path / "trace.csv")
    written = emit_plots(table, "line", tmp_path, name="demo")
    names = sorted(p.name for p in written)
    assert names == ["demo_trace.csv", "demo_trace.svg"]


def test_emit_plots_empty_table_warns(tmp_path):
    with pytest.warns(UserWarning, match="empty"):
        written = emit_plots(ResultTable(columns=SOLVE_COLUMNS, rows=[]), "line", tmp_path)
    assert written == []


def test_emit_plots_bad_kind(tmp_path):
    with pytest.raises(ValueError, match="kind"):
        emit_plots(ResultTable(columns=(), rows=[]), "surface", tmp_path)


# ------------------------------------------------------------------------ cli


def test_cli_canned_list(capsys):
    assert main(["canned", "--list"]) == 0
    out = capsys.readouterr().out
    assert "recovery-curves" in out and "prop1-demo" in out


def test_cli_validation_failures(capsys, tmp_path):
    assert main(["run", str(tmp_path / "missing.yaml")]) == 1
    assert main(["canned", "no-such-preset"]) == 1
    assert main(["canned"]) == 1  # name or --list required
    assert main(["plot", "x.csv", "--kind", "surface"]) == 1  # bad choice
    assert main(["bogus-command"]) == 1
    err = capsys.readouterr().err
    assert "error:" in err


def test_cli_run_small_scenario(tmp_path, capsys):
    path = tmp_path / "s.yaml"
    path.write_text(
        "name: cli-tiny\nd: 5\nm: 40\n"
        "solvers:\n  - {label: a, iters: 5, policy: {kind: constant, eta0: 0.05}}\n"
        "trials: 2\nbase_seed: 3\n"
    )
    out = tmp_path / "results"
    assert main(["run", str(path), "--out", str(out)]) == 0
    assert (out / "cli-tiny.csv").exists()
    assert "cli-tiny: 2 rows" in capsys.readouterr().out


def test_cli_seed_override_changes_rows(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text(
        "name: cli-tiny\nd: 5\nm: 40\n"
        "solvers:\n  - {label: a, iters: 5, policy: {kind: constant, eta0: 0.05}}\n"
        "trials: 1\nbase_seed: 3\n"
    )
    main(["run", str(path), "--out", str(tmp_path / "a")])
    main(["run", str(path), "--out", str(tmp_path / "b"), "--seed", "99"])
    ra = ResultTable.from_csv(tmp_path / "a" / "cli-tiny.csv").rows[0]
    rb = ResultTable.from_csv(tmp_path / "b" / "cli-tiny.csv").rows[0]
    assert ra["seed"] != rb["seed"]


def test_cli_runtime_failure_exit_code(tmp_path, monkeypatch, capsys):
    import signrip.experiments.runner as runner_mod

    def explode(*a, **k):
        raise RuntimeError("boom")

    monkeypatch.setattr(runner_mod, "subgd", explode)
    path = tmp_path / "s.yaml"
    path.write_text(
        "name: cli-tiny\nd: 5\nm: 40\n"
        "solvers:\n  - {label: a, iters: 5, policy: {kind: constant, eta0: 0.05}}\n"
    )
    assert main(["run", str(path), "--out", str(tmp_path)]) == 2
    assert "1 failed" in capsys.readouterr().out


def test_cli_plot_subcommand(tiny_run, tmp_path, capsys):
    _, _, run_dir = tiny_run
    assert main(["plot", str(run_dir / "tiny.csv"), "--kind", "line",
                 "--out", str(tmp_path)]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert any(line.endswith("tiny_line.svg") for line in printed)
    assert (tmp_path / "tiny_line.svg").exists()


def test_cli_rip_subcommand(tmp_path, capsys):
    args = ["rip", "--kind", "sign", "--d", "6", "--m", "120",
            "--n-samples", "20", "--seed", "4"]
    assert main(args) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "kind,r,m,d,p,sigma,n_samples,delta_hat"
    assert out[1].startswith("Sign,1,120,6,")
    # --out appends to rip.csv, header written once
    assert main([*args, "--out", str(tmp_path)]) == 0
    assert main([*args, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "rip.csv").read_text().splitlines()
    assert lines[0] == "kind,r,m,d,p,sigma,n_samples,delta_hat"
    assert len(lines) == 3 and lines[1] == lines[2]


def test_cli_rip_qdev_kind(capsys):
    assert main(["rip", "--kind", "qdev", "--d", "6", "--m", "150",
                 "--p", "0.1", "--scale", "3", "--n-samples", "20"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "d,m,p,sigma,n_samples,deviation,noise_only"
    fields = out[1].split(",")
    assert float(fields[5]) > 0


def test_cli_output_env_honored(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "envout"))
    assert main(["rip", "--kind", "l2", "--d", "5", "--m", "80",
                 "--n-samples", "10"]) == 0
    capsys.readouterr()
    assert (tmp_path / "envout" / "rip.csv").exists()
