import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from conftest import random_spd
from kdppgeom.cli import main
from kdppgeom.kdpp import kdpp_distribution
from kdppgeom.kernelfile import save_kernel
from kdppgeom.mle import draw_from_table

NUM = {"type": "number"}
VEC = {"type": "array", "items": NUM}
MAT = {"type": "array", "items": VEC}

FISHER_SCHEMA = {
    "type": "object",
    "required": ["n", "k", "theta", "eta", "G", "eigvals_G", "rank"],
    "properties": {"eta": VEC, "G": MAT, "eigvals_G": VEC, "rank": {"type": "integer"}},
}
IDENT_SCHEMA = {
    "type": "object",
    "required": ["n", "k", "m", "num_subsets", "phi_rank", "dim_v", "lower_bound", "exceeds_scale_cone"],
    "properties": {"exceeds_scale_cone": {"type": "boolean"}, "dim_v": {"type": "integer"}},
}
INVARIANCE_SCHEMA = {
    "type": "object",
    "required": ["k", "mode", "tv", "tol", "passed"],
    "properties": {"tv": NUM, "passed": {"type": "boolean"}},
}
FIT_SCHEMA = {
    "type": "object",
    "required": ["n", "k", "num_observations", "theta_tilde_hat", "log_likelihood",
                 "grad_norm", "iters", "converged", "eta_hat"],
    "properties": {"theta_tilde_hat": VEC, "eta_hat": VEC, "converged": {"type": "boolean"}},
}
EXTERIOR_SCHEMA = {
    "type": "object",
    "required": ["k", "subsets", "inclusion_direct", "inclusion_exterior", "max_deviation"],
    "properties": {
        "plucker": {
            "type": "object",
            "required": ["p", "relation_residual", "sqrt_residual", "passed"],
        }
    },
}
PROB_RECORD = {
    "type": "object",
    "required": ["subset", "prob"],
    "properties": {"subset": {"type": "array", "items": {"type": "integer"}}, "prob": NUM},
}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, schema, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    obj = json.loads(out)
    jsonschema.validate(obj, schema)
    return obj


@pytest.fixture
def kernels(tmp_path):
    rng = np.random.default_rng(99)
    paths = {}
    for name, m in {
        "id3": np.eye(3),
        "d123": np.diag([1.0, 2.0, 3.0]),
        "spd6": random_spd(rng, 6),
        "spd7": random_spd(rng, 7),
        "sing": np.diag([1.0, 1.0, 0.0]),
    }.items():
        paths[name] = tmp_path / f"{name}.json"
        save_kernel(paths[name], m)
    pert = np.diag([1.0, 2.0, 3.0])
    pert[0, 1] = pert[1, 0] = 0.1
    paths["d123p"] = tmp_path / "d123p.json"
    save_kernel(paths["d123p"], pert)
    q = np.linalg.qr(rng.standard_normal((4, 2)))[0]
    paths["proj"] = tmp_path / "proj.json"
    save_kernel(paths["proj"], q @ q.T)
    paths["rank1"] = tmp_path / "rank1.json"
    v = np.array([1.0, 2.0, 2.0]) / 3
    save_kernel(paths["rank1"], np.outer(v, v))
    return paths


def test_prob_table_identity(capsys, kernels):
    code, out, _ = run(capsys, "prob", kernels["id3"], "--k", 2, "--table")
    assert code == 0
    rows = [line.split("\t") for line in out.strip().splitlines()]
    assert [r[0] for r in rows] == ["{1,2}", "{1,3}", "{2,3}"]
    assert all(r[1] == "0.333333333333" for r in rows)


def test_prob_kdpp_subset(capsys, kernels):
    code, out, _ = run(capsys, "prob", kernels["d123"], "--k", 2, "--subset", "2,3")
    assert code == 0 and out.split("\t")[1].strip() == f"{6 / 11:.12g}"
    rec = run_json(capsys, PROB_RECORD, "prob", kernels["d123"], "--k", 2, "--subset", "2,3", "--json")
    assert rec["subset"] == [2, 3] and rec["prob"] == pytest.approx(6 / 11, abs=1e-15)


def test_prob_full_subset(capsys, kernels):
    rec = run_json(capsys, PROB_RECORD, "prob", kernels["d123"], "--full", "--subset", "1,3", "--json")
    assert rec["prob"] == pytest.approx(0.125, abs=1e-15)


def test_prob_full_table_json(capsys, kernels):
    recs = run_json(capsys, {"type": "array", "items": PROB_RECORD},
                    "prob", kernels["d123"], "--full", "--table", "--json")
    assert len(recs) == 8 and sum(r["prob"] for r in recs) == pytest.approx(1.0)


def test_prob_errors(capsys, kernels, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "matrix": [1, 2, 3, 4]}')
    assert run(capsys, "prob", bad, "--k", 1, "--table")[0] == 2
    assert run(capsys, "prob", kernels["d123"], "--k", 2, "--subset", "1,4")[0] == 2
    assert run(capsys, "prob", kernels["rank1"], "--k", 2, "--table")[0] == 3


def test_fisher_symmetric_point(capsys):
    for k in (2, 1):
        obj = run_json(capsys, FISHER_SCHEMA, "fisher", "--theta", "0,0,0", "--k", k)
        proj = np.eye(3) - np.ones((3, 3)) / 3
        np.testing.assert_allclose(obj["G"], proj / 3, atol=1e-15)
        np.testing.assert_allclose(obj["eigvals_G"], [0, 1 / 3, 1 / 3], atol=1e-15)
        assert obj["rank"] == 2


def test_fisher_eta(capsys):
    obj = run_json(capsys, FISHER_SCHEMA, "fisher", "--theta", "0,0.6931,1.0986", "--k", 2)
    np.testing.assert_allclose(obj["eta"], [0.4545, 0.7273, 0.8182], atol=1e-4)


def test_fisher_from_kernel_file(capsys, kernels, tmp_path):
    obj = run_json(capsys, FISHER_SCHEMA, "fisher", kernels["d123"], "--k", 2)
    np.testing.assert_allclose(sorted(obj["eta"]), [5 / 11, 8 / 11, 9 / 11], atol=1e-12)
    code, out, err = run(capsys, "fisher", kernels["spd6"], "--k", 3)
    assert code == 0 and "warning" in err
    assert run(capsys, "fisher", kernels["sing"], "--k", 1)[0] == 4


def test_identifiability_identity(capsys, kernels, tmp_path):
    basis = tmp_path / "basis.json"
    obj = run_json(capsys, IDENT_SCHEMA, "identifiability", kernels["id3"], "--k", 2,
                   "--emit-basis", basis)
    assert obj["dim_v"] == 4 and obj["lower_bound"] == 4
    dirs = json.loads(basis.read_text())
    assert len(dirs) == 4 and all(d["n"] == 3 and len(d["matrix"]) == 9 for d in dirs)


def test_identifiability_thresholds(capsys, kernels):
    six = run_json(capsys, IDENT_SCHEMA, "identifiability", kernels["spd6"], "--k", 3)
    assert six["dim_v"] >= 2 and six["exceeds_scale_cone"]
    seven = run_json(capsys, IDENT_SCHEMA, "identifiability", kernels["spd7"], "--k", 3)
    assert seven["lower_bound"] == 1 and seven["dim_v"] >= 1
    assert run(capsys, "identifiability", kernels["sing"], "--k", 2)[0] == 4


def test_invariance_commands(capsys, kernels):
    assert run_json(capsys, INVARIANCE_SCHEMA, "invariance", kernels["spd6"], "--k", 3, "--scale", 3)["passed"]
    assert run_json(capsys, INVARIANCE_SCHEMA, "invariance", kernels["d123"], "--k", 2,
                    "--flip", "1,-1,1")["passed"]
    rot = run_json(capsys, INVARIANCE_SCHEMA, "invariance", kernels["id3"], "--k", 2, "--rotate-seed", 4)
    assert rot["passed"]
    against = run_json(capsys, INVARIANCE_SCHEMA, "invariance", kernels["d123"], "--k", 2,
                       "--against", kernels["d123p"])
    assert not against["passed"] and against["tv"] > 0
    assert run(capsys, "invariance", kernels["d123"], "--k", 2, "--flip", "1,-1")[0] == 2


def test_fit_uniform(capsys, tmp_path):
    data = tmp_path / "uniform.txt"
    data.write_text("# all pairs\n1,2\n1,3\n2,3\n\n1,2\n1,3\n2,3\n")
    obj = run_json(capsys, FIT_SCHEMA, "fit", data, "--n", 3, "--k", 2)
    np.testing.assert_allclose(obj["theta_tilde_hat"], [0, 0], atol=1e-6)
    assert obj["num_observations"] == 6


def test_fit_seeded_draws(capsys, kernels, tmp_path):
    code, out, _ = run(capsys, "draw", kernels["d123"], "--k", 2, "--size", 300, "--seed", 5)
    assert code == 0
    data = tmp_path / "draws.txt"
    data.write_text(out)
    expected = draw_from_table(kdpp_distribution(np.diag([1.0, 2.0, 3.0]), 2), 300, 5)
    assert out.splitlines() == [",".join(map(str, a.elements)) for a in expected]
    obj = run_json(capsys, FIT_SCHEMA, "fit", data, "--n", 3, "--k", 2)
    rows = [list(map(int, line.split(","))) for line in out.splitlines()]
    empirical = np.mean([[i in r for i in (1, 2, 3)] for r in rows], axis=0)
    assert obj["converged"]
    assert np.max(np.abs(np.array(obj["eta_hat"]) - empirical)) <= 0.1


def test_fit_boundary_exit(capsys, tmp_path):
    data = tmp_path / "b.txt"
    data.write_text("1,2\n1,3\n1,2\n")
    code, _, err = run(capsys, "fit", data, "--n", 3, "--k", 2)
    assert code == 5 and "element 1" in err


def test_exterior_routes(capsys, kernels):
    obj = run_json(capsys, EXTERIOR_SCHEMA, "exterior", kernels["id3"], "--k", 2)
    np.testing.assert_allclose(obj["inclusion_direct"], 0.25, atol=1e-15)
    assert obj["max_deviation"] <= 1e-15
    obj = run_json(capsys, EXTERIOR_SCHEMA, "exterior", kernels["d123"], "--k", 2)
    i = obj["subsets"].index([2, 3])
    assert obj["inclusion_direct"][i] == pytest.approx(0.5)
    assert obj["inclusion_exterior"][i] == pytest.approx(0.5)


def test_exterior_plucker(capsys, kernels, tmp_path):
    obj = run_json(capsys, EXTERIOR_SCHEMA, "exterior", kernels["proj"], "--plucker")
    assert obj["plucker"]["passed"]
    assert obj["plucker"]["relation_residual"] <= 1e-12 and obj["plucker"]["sqrt_residual"] <= 1e-12
    assert run(capsys, "exterior", kernels["d123"], "--plucker")[0] == 7
    big = tmp_path / "big.json"
    save_kernel(big, np.eye(20))
    assert run(capsys, "exterior", big, "--k", 4)[0] == 6


def test_outputs_deterministic(capsys, kernels):
    a = run(capsys, "invariance", kernels["spd6"], "--k", 2, "--rotate-seed", 1, "--flip", "1,1,-1,1,-1,1")
    b = run(capsys, "invariance", kernels["spd6"], "--k", 2, "--rotate-seed", 1, "--flip", "1,1,-1,1,-1,1")
    assert a == b


def test_console_script(kernels):
    proc = subprocess.run(
        [sys.executable, "-m", "kdppgeom.cli", "prob", str(kernels["id3"]), "--k", "1", "--table"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.count("0.333333333333") == 3
