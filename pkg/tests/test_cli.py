import json

import numpy as np
import pytest

from pharmonious import interval_grid, read_field_csv, square_grid
from pharmonious.cli import main


def run(*argv):
    return main([str(a) for a in argv])


# -- probe ---------------------------------------------------------------------


def test_probe_1d_grid(tmp_path, capsys):
    assert run("probe", "--grid", "1d", "--n", "257", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "probe.json").read_text())
    probe = doc["probe"]
    assert 1.8 <= probe["doubling_estimate"] <= 2.05
    assert 1.0 <= probe["annular_decay_estimates"]["1.0"] <= 1.1
    assert doc["manifest"]["command"] == "probe"


def test_probe_2d_grid(tmp_path):
    assert run("probe", "--grid", "2d", "--n", "65", "--samples", "50",
               "--out", tmp_path) == 0
    probe = json.loads((tmp_path / "probe.json").read_text())["probe"]
    assert 3.5 <= probe["doubling_estimate"] <= 4.4
    assert 1.9 <= probe["annular_decay_estimates"]["1.0"] <= 2.2


def test_probe_malformed_file(tmp_path, capsys):
    bad = tmp_path / "space.json"
    bad.write_text(json.dumps({"metric": "euclidean", "points": []}))
    assert run("probe", "--space", bad, "--out", tmp_path) == 2
    assert "no points" in capsys.readouterr().err


def test_probe_invalid_record_named(tmp_path, capsys):
    bad = tmp_path / "space.json"
    bad.write_text(json.dumps({
        "metric": "euclidean",
        "points": [{"id": 0, "coords": [0.0], "weight": 1.0},
                   {"id": 1, "coords": [1.0]}],  # missing weight
    }))
    assert run("probe", "--space", bad, "--out", tmp_path) == 2
    err = capsys.readouterr().err
    assert "#1" in err


# -- validate --------------------------------------------------------------------


def test_validate_good_setup(tmp_path):
    code = run("validate", "--grid", "1d", "--n", "257", "--rho-factor", 0.4,
               "--alpha", 0.3, "--epsilon", 0.5, "--lam", 0.4,
               "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "validate.json").read_text())
    assert doc["pass"] and doc["gate"]["pass"]


def test_validate_gate_failure_names_condition(tmp_path, capsys):
    code = run("validate", "--grid", "1d", "--n", "257", "--rho-factor", 0.4,
               "--alpha", 0.6, "--epsilon", 0.2, "--lam", 0.2, "--L", 2.0,
               "--out", tmp_path)
    assert code == 1
    out = capsys.readouterr().out
    assert "alpha_below_inverse_lipschitz" in out


def test_validate_zero_interior_radius(tmp_path):
    sp = interval_grid(17)
    rho_csv = tmp_path / "rho.csv"
    lines = ["id,rho"]
    d = sp.boundary_distances()
    for i in range(len(sp)):
        v = 0.0 if i == 8 else float(0.5 * d[i])
        lines.append(f"{i},{v!r}")
    rho_csv.write_text("\n".join(lines) + "\n")
    code = run("validate", "--grid", "1d", "--n", "17", "--rho", rho_csv,
               "--alpha", 0.3, "--epsilon", 0.5, "--lam", 0.4,
               "--out", tmp_path)
    assert code == 1
    doc = json.loads((tmp_path / "validate.json").read_text())
    assert doc["admissible"]["nonpositive_interior"] == [8]


def test_validate_missing_file(tmp_path):
    assert run("validate", "--grid", "1d", "--n", "17",
               "--rho", tmp_path / "absent.csv",
               "--alpha", 0.3, "--epsilon", 0.5, "--lam", 0.4,
               "--out", tmp_path) == 2


# -- solve -----------------------------------------------------------------------


def test_solve_linear_problem_converges_immediately(tmp_path):
    code = run("solve", "--grid", "1d", "--n", "257", "--rho-factor", 0.4,
               "--boundary-fn", "linear", "--alpha", 0.3,
               "--init-fn", "linear", "--tol", 1e-12, "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "solve_report.json").read_text())
    assert doc["converged"] and doc["iterations_used"] == 0
    sp = interval_grid(257)
    u = read_field_csv(sp, tmp_path / "field.csv")
    assert np.array_equal(u, sp.coords[:, 0])


def test_solve_2d_reference_problem(tmp_path):
    code = run("solve", "--grid", "2d", "--n", "65", "--rho-factor", 0.4,
               "--boundary-fn", "saddle", "--alpha", 0.3, "--init-fn",
               "saddle", "--tol", 1e-8, "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "solve_report.json").read_text())
    assert doc["converged"]
    assert doc["final_residual"] <= 1e-8


def test_solve_iteration_budget_exit_code(tmp_path):
    code = run("solve", "--grid", "2d", "--n", "33", "--rho-factor", 0.4,
               "--boundary-fn", "saddle", "--alpha", 0.3, "--init-fn",
               "saddle", "--tol", 1e-12, "--max-iter", 1, "--out", tmp_path)
    assert code == 3
    # partial outputs still written
    assert (tmp_path / "field.csv").exists()
    assert (tmp_path / "solve_report.json").exists()


def test_solve_non_admissible_always_exits_one(tmp_path):
    code = run("solve", "--grid", "1d", "--n", "65", "--rho-factor", 2.0,
               "--boundary-fn", "linear", "--alpha", 0.3, "--force",
               "--out", tmp_path)
    assert code == 1


def test_solve_gate_blocks_without_force(tmp_path):
    args = ["solve", "--grid", "1d", "--n", "65", "--rho-factor", 0.4,
            "--boundary-fn", "linear", "--alpha", 0.6, "--epsilon", 0.5,
            "--lam", 0.4, "--init-fn", "linear", "--out", tmp_path]
    assert run(*args) == 1
    assert run(*args, "--force") == 0


# -- certify ---------------------------------------------------------------------


def test_certify_linear_fixed_point(tmp_path):
    run("solve", "--grid", "1d", "--n", "257", "--rho-factor", 0.4,
        "--boundary-fn", "linear", "--alpha", 0.3, "--init-fn", "linear",
        "--tol", 1e-12, "--out", tmp_path)
    code = run("certify", "--grid", "1d", "--n", "257", "--rho-factor", 0.4,
               "--field", tmp_path / "field.csv", "--alpha", 0.3,
               "--epsilon", 0.5, "--lam", 0.4, "--m", 2, "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "certificate.json").read_text())
    assert doc["pass"]
    assert doc["empirical_constant"] == 1.0
    assert abs(doc["theoretical_constant"] - 140.0) < 1e-9


def test_certify_alpha_one_scope(tmp_path, capsys):
    run("solve", "--grid", "1d", "--n", "65", "--rho-factor", 0.4,
        "--boundary-fn", "linear", "--alpha", 0.3, "--init-fn", "linear",
        "--tol", 1e-12, "--out", tmp_path)
    code = run("certify", "--grid", "1d", "--n", "65", "--rho-factor", 0.4,
               "--field", tmp_path / "field.csv", "--alpha", 1.0,
               "--epsilon", 0.5, "--lam", 0.4, "--m", 2, "--out", tmp_path)
    assert code == 1
    assert "scope" in capsys.readouterr().err


def test_certify_stale_field(tmp_path, capsys):
    sp = interval_grid(65)
    field = tmp_path / "stale.csv"
    rows = ["id,value"] + [f"{i},{float(np.sin(7.0 * i))!r}" for i in range(len(sp))]
    field.write_text("\n".join(rows) + "\n")
    code = run("certify", "--grid", "1d", "--n", "65", "--rho-factor", 0.4,
               "--field", field, "--alpha", 0.3, "--epsilon", 0.5,
               "--lam", 0.4, "--m", 2, "--out", tmp_path)
    assert code == 1
    assert "not a fixed point" in capsys.readouterr().err


# -- asymptotics --------------------------------------------------------------------


def test_asymptotics_mean_mode(tmp_path):
    code = run("asymptotics", "--fn", "sq_norm", "--x", "1,0", "--n", 2,
               "--mode", "mean", "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "asymptotics.json").read_text())
    assert doc["predicted"] == 0.5
    assert abs(doc["extrapolated"] - 0.5) < 0.02 * 0.5
    rows = (tmp_path / "asymptotics.csv").read_text().strip().splitlines()
    assert rows[0] == "radius,quotient"
    assert len(rows) == 1 + len(doc["radii"])


def test_asymptotics_midrange_mode(tmp_path):
    code = run("asymptotics", "--fn", "sq_norm", "--x", "1,0", "--n", 2,
               "--mode", "midrange", "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "asymptotics.json").read_text())
    assert doc["predicted"] == 1.0
    assert abs(doc["extrapolated"] - 1.0) < 0.02


def test_asymptotics_linear_p_harmonic(tmp_path):
    code = run("asymptotics", "--fn", "linear", "--x", "0.2,0.1", "--n", 2,
               "--mode", "p", "--p", 7.5, "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "asymptotics.json").read_text())
    assert doc["predicted"] == 0.0
    assert abs(doc["extrapolated"]) < 1e-12


def test_asymptotics_unknown_function(tmp_path):
    assert run("asymptotics", "--fn", "nope", "--x", "1,0", "--n", 2,
               "--out", tmp_path) == 2


# -- round trips and manifests --------------------------------------------------------


def test_field_csv_reload_bit_exact(tmp_path):
    run("solve", "--grid", "2d", "--n", "33", "--rho-factor", 0.4,
        "--boundary-fn", "saddle", "--alpha", 0.3, "--init-fn", "saddle",
        "--out", tmp_path)
    sp = square_grid(33)
    u1 = read_field_csv(sp, tmp_path / "field.csv")
    text = (tmp_path / "field.csv").read_bytes()
    u2 = read_field_csv(sp, tmp_path / "field.csv")
    assert np.array_equal(u1, u2)
    # shortest-roundtrip decimals: rewriting the parsed values is identical
    from pharmonious import write_field_csv
    write_field_csv(sp, u1, tmp_path / "field2.csv")
    assert (tmp_path / "field2.csv").read_bytes() == text


def test_manifest_rerun_reproduces_bytes(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    run("solve", "--grid", "2d", "--n", "33", "--rho-factor", 0.4,
        "--boundary-fn", "saddle", "--alpha", 0.3, "--init-fn", "saddle",
        "--out", out1)
    manifest = json.loads((out1 / "solve_report.json").read_text())["manifest"]
    argv = list(manifest["argv"])
    argv[argv.index(str(out1))] = str(out2)
    assert main(argv) == 0
    assert (out1 / "field.csv").read_bytes() == (out2 / "field.csv").read_bytes()


def test_threads_flag_does_not_change_fields(tmp_path):
    outs = []
    for threads in (1, 4):
        out = tmp_path / f"t{threads}"
        run("solve", "--grid", "2d", "--n", "33", "--rho-factor", 0.4,
            "--boundary-fn", "saddle", "--alpha", 0.3, "--init-fn", "saddle",
            "--threads", threads, "--out", out)
        outs.append((out / "field.csv").read_bytes())
    assert outs[0] == outs[1]


def test_solve_config_file(tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"alpha": 0.3, "tolerance": 1e-12,
                               "max_iterations": 50, "record_every": 0}))
    code = run("solve", "--grid", "1d", "--n", "257", "--rho-factor", 0.4,
               "--boundary-fn", "linear", "--init-fn", "linear",
               "--config", cfg, "--out", tmp_path)
    assert code == 0
    doc = json.loads((tmp_path / "solve_report.json").read_text())
    assert doc["converged"] and doc["iterations_used"] == 0
    assert doc["manifest"]["command"] == "solve"


def test_solve_missing_alpha(tmp_path):
    code = run("solve", "--grid", "1d", "--n", "17", "--rho-factor", 0.4,
               "--boundary-fn", "linear", "--out", tmp_path)
    assert code == 2
