import json
import math

import numpy as np
import pytest

from graphonfit import AdjacencyMatrix
from graphonfit.cli import main


def run(argv):
    return main([str(a) for a in argv])


def sample_args(out, n=30, rho=0.3, graphon="cosine", seed=11, latents=True):
    argv = [
        "sample", "--graphon", graphon, "--n", n, "--rho", rho,
        "--seed", seed, "--out", out,
    ]
    if latents:
        argv.append("--emit-latents")
    return argv


class TestSample:
    def test_writes_edge_list_and_sidecar(self, tmp_path, capsys):
        out = tmp_path / "net.txt"
        assert run(sample_args(out)) == 0
        a = AdjacencyMatrix.from_edge_list(out.read_text())
        assert a.n == 30
        sidecar = json.loads((tmp_path / "net.txt.json").read_text())
        assert sidecar["m"] == a.edge_count
        assert len(sidecar["xi"]) == 30
        assert "density=" in capsys.readouterr().out

    def test_byte_identical_rerun(self, tmp_path):
        o1, o2 = tmp_path / "a.txt", tmp_path / "b.txt"
        run(sample_args(o1))
        run(sample_args(o2))
        assert o1.read_bytes() == o2.read_bytes()

    def test_model_violation_exits_3(self, tmp_path, capsys):
        # rho * sup f = 0.7 * 1.5 > 1 for the cosine graphon
        assert run(sample_args(tmp_path / "x.txt", rho=0.7)) == 3
        assert "error" in capsys.readouterr().err

    def test_unknown_graphon_exits_2(self, tmp_path):
        assert run(sample_args(tmp_path / "x.txt", graphon="nope")) == 2


class TestFitEstimateRisk:
    def test_planted_fit_is_exact(self, tmp_path, capsys):
        # two 2-cliques, no cross edges: profile log-likelihood is 0
        edges = tmp_path / "planted.txt"
        edges.write_text("4 2\n0 1\n2 3\n")
        fit = tmp_path / "fit.json"
        assert run(["fit", "--edges", edges, "--k", 2, "--out", fit]) == 0
        obj = json.loads(fit.read_text())
        assert obj["assignment"] == [1, 1, 2, 2]
        assert obj["profile_loglik"] == pytest.approx(0.0, abs=1e-12)
        assert "loglik=" in capsys.readouterr().out

    def test_exhaustive_at_least_as_good(self, tmp_path):
        out = tmp_path / "net.txt"
        run(sample_args(out, n=8, rho=0.4, seed=3))
        f1, f2 = tmp_path / "f1.json", tmp_path / "f2.json"
        assert run(["fit", "--edges", out, "--k", 2, "--out", f1,
                    "--restarts", 1]) == 0
        assert run(["fit", "--edges", out, "--k", 2, "--out", f2,
                    "--exhaustive"]) == 0
        l1 = json.loads(f1.read_text())["profile_loglik"]
        l2 = json.loads(f2.read_text())["profile_loglik"]
        assert l2 >= l1 - 1e-10

    def test_infeasible_constraints_exit_2(self, tmp_path):
        edges = tmp_path / "planted.txt"
        edges.write_text("4 2\n0 1\n2 3\n")
        assert run(["fit", "--edges", edges, "--k", 3,
                    "--out", tmp_path / "f.json"]) == 2

    def test_estimate_and_risk_roundtrip(self, tmp_path, capsys):
        net = tmp_path / "net.txt"
        run(sample_args(net, n=40, rho=0.3, seed=21))
        fit = tmp_path / "fit.json"
        run(["fit", "--edges", net, "--k", 3, "--out", fit])
        est = tmp_path / "est.json"
        assert run(["estimate", "--fit", fit, "--out", est]) == 0
        eobj = json.loads(est.read_text())
        v = np.asarray(eobj["values"])
        assert v.shape == (3, 3) and np.array_equal(v, v.T)
        assert sum(eobj["h"]) == 40

        rep = tmp_path / "risk.json"
        assert run(["risk", "--edges", net, "--sidecar", f"{net}.json",
                    "--fit", fit, "--grid", 64, "--out", rep]) == 0
        robj = json.loads(rep.read_text())
        assert robj["fitted_risk"] >= 0.0
        assert robj["excess_risk"] == pytest.approx(
            robj["fitted_risk"] - robj["oracle_risk"]
        )
        assert robj["mse_aligned"] <= robj["mse_identity"] + 1e-12
        assert "fitted_risk=" in capsys.readouterr().out

    def test_risk_requires_latents(self, tmp_path):
        net = tmp_path / "net.txt"
        run(sample_args(net, latents=False))
        fit = tmp_path / "fit.json"
        run(["fit", "--edges", net, "--k", 2, "--out", fit])
        assert run(["risk", "--edges", net, "--sidecar", f"{net}.json",
                    "--fit", fit, "--out", tmp_path / "r.json"]) == 2

    def test_missing_file_exits_2(self, tmp_path):
        assert run(["fit", "--edges", tmp_path / "absent.txt", "--k", 2,
                    "--out", tmp_path / "f.json"]) == 2


class TestSweep:
    def test_smoke(self, tmp_path, capsys):
        cfg = {
            "graphon_name": "constant",
            "n_list": [40],
            "k_rule": "2",
            "rho_rule": "0.3",
            "replicates": 2,
            "restarts": 1,
            "seed": 5,
            "grid": 64,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out_dir = tmp_path / "out"
        assert run(["sweep", "--config", cfg_path, "--out-dir", out_dir,
                    "--dat-metric", "excess_risk"]) == 0
        lines = (out_dir / "results.csv").read_text().splitlines()
        assert len(lines) == 3  # header + 2 rows
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["summary"]["40"]["replicates"] == 2
        assert (out_dir / "excess_risk.dat").exists()
        assert "2 rows" in capsys.readouterr().out

    def test_bad_config_exits_2(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text('{"graphon_name": "constant"}')
        assert run(["sweep", "--config", cfg_path,
                    "--out-dir", tmp_path / "out"]) == 2


class TestSelftest:
    def test_passes(self, capsys):
        assert run(["selftest", "--verbose"]) == 0
        out = capsys.readouterr().out
        assert "selftest passed" in out
        assert "profile-likelihood-identity: pass" in out

    def test_injected_fault_exits_4(self, capsys):
        assert run(["selftest", "--corrupt-kl"]) == 4
        assert "bernoulli-kl-taylor-grid" in capsys.readouterr().err
