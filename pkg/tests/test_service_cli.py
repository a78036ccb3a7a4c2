import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from bpcl.cli import main
from bpcl.lattice import Grid1D, MeshFunction, MeshFunction1D, write_mesh_csv
from bpcl.lattice import write_mesh1d_csv
from bpcl.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def config_payload(**over):
    cfg = {
        "domain": {"extent": 32.0, "depth": 7},
        "kernel": {"name": "tensor_hilbert"},
        "symbol": {"kind": "coord:x1+x2"},
        "exponents": {"p1": 2, "p2": 2, "q1": 2, "q2": 2},
        "awf": {"A": 8.0},
        "budgets": {"trials": 2, "max_rectangles": 8, "rect_depth": 6},
        "seed": 1,
    }
    cfg.update(over)
    return cfg


class TestEndpoints:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200 and r.json()["status"] == "ok"

    def test_awf_certificate(self, client):
        r = client.post("/awf", json={"config": config_payload()})
        assert r.status_code == 200
        body = r.json()
        assert set(body) == {"R", "A", "residual", "rho", "lhs", "rhs", "ratio"}
        assert body["residual"] < 1e-8

    def test_awf_bad_config_is_400(self, client):
        bad = config_payload(domain={"extent": 32.0, "depth": 4})  # cannot host A = 8
        r = client.post("/awf", json={"config": bad})
        assert r.status_code == 400
        assert "reflections" in r.json()["detail"]

    def test_norms_endpoint(self, client, unit_box5):
        b = MeshFunction.from_callable(unit_box5, lambda x1, x2: x1 + x2)
        r = client.post(
            "/norms",
            json={"mesh_csv": write_mesh_csv(b), "which": "bmo,holder:alpha=0.5:axis=2,ap:p=2"},
        )
        assert r.status_code == 200
        res = r.json()["results"]
        assert res["bmo"] == pytest.approx(0.3330078125)
        assert "holder:alpha=0.5:axis=2" in res and "ap:p=2.0" in res

    def test_norms_unknown_functional(self, client, unit_box5):
        b = MeshFunction.constant(unit_box5, 1.0)
        r = client.post("/norms", json={"mesh_csv": write_mesh_csv(b), "which": "entropy"})
        assert r.status_code == 400

    def test_sparse_endpoint_1d(self, client):
        g = Grid1D(0.0, 1.0, 6)
        vals = np.full(g.n, -1.0 / 16.0)
        vals[: g.n // 16] += 1.0
        r = client.post(
            "/sparse", json={"mesh_csv": write_mesh1d_csv(MeshFunction1D(g, vals))}
        )
        assert r.status_code == 200
        tree = r.json()["tree"]
        assert tree[0] == {
            "level": 0, "index": 0,
            "avg_abs": tree[0]["avg_abs"], "piece_sup": tree[0]["piece_sup"],
            "e_set_measure": tree[0]["e_set_measure"],
        }
        assert (tree[1]["level"], tree[1]["index"]) == (2, 0)

    def test_sparse_recenter(self, client, unit_box5):
        rng = np.random.default_rng(1)
        f = MeshFunction(unit_box5, rng.uniform(-1, 1, unit_box5.shape) + 0.3)
        r = client.post("/sparse", json={"mesh_csv": write_mesh_csv(f), "recenter": True})
        assert r.status_code == 200
        assert r.json()["node_count"] >= 1

    def test_model_endpoint_roundtrip(self, client, unit_box5):
        rng = np.random.default_rng(2)
        f = MeshFunction(unit_box5, rng.standard_normal(unit_box5.shape))
        payload = {
            "spec": {"kind": "shift", "complexity": [1, 0, 0, 1], "seed": 9},
            "mesh_csv": write_mesh_csv(f),
        }
        r1 = client.post("/model/apply", json=payload)
        r2 = client.post("/model/apply", json=payload)
        assert r1.status_code == 200
        assert r1.json()["mesh_csv"] == r2.json()["mesh_csv"]  # seeded regeneration

    def test_report_endpoint_checks(self, client):
        r = client.post("/report", json={"config": config_payload()})
        assert r.status_code == 200
        body = r.json()
        assert body["report"]["label"] == "p1=q1,p2=q2"
        assert isinstance(body["checks"], list)

    def test_bands_endpoint(self, client):
        r = client.get("/bands")
        assert r.status_code == 200
        assert "kernels/regularity_ratio_max" in r.json()["bands"]

    def test_bands_check_subset(self, client):
        r = client.post("/bands/check", json={"groups": ["kernels"]})
        assert r.status_code == 200
        body = r.json()
        assert body["passed"]
        assert all(c["name"].startswith("kernels/") for c in body["checks"])


class TestCli:
    def test_awf_command(self, tmp_path):
        cfgp = tmp_path / "cfg.json"
        cfgp.write_text(json.dumps(config_payload()))
        out = tmp_path / "cert.json"
        rc = main(["awf", "--config", str(cfgp), "--out", str(out)])
        assert rc == 0
        cert = json.loads(out.read_text())
        assert cert["residual"] < 1e-8 and cert["lhs"] > 0

    def test_depth_and_box_overrides(self, tmp_path):
        cfgp = tmp_path / "cfg.json"
        cfgp.write_text(json.dumps(config_payload()))
        out = tmp_path / "cert.json"
        rc = main(["awf", "--config", str(cfgp), "--depth", "6", "--box", "64", "--out", str(out)])
        assert rc == 0

    def test_norms_command(self, tmp_path, unit_box5):
        b = MeshFunction.from_callable(unit_box5, lambda x1, x2: np.sign(x2 - 0.5) + 0.0 * x1)
        src = tmp_path / "b.csv"
        src.write_text(write_mesh_csv(b))
        out = tmp_path / "norms.json"
        rc = main(["norms", "--input", str(src), "--which", "bmo,constancy:mode=x2_slices",
                   "--out", str(out)])
        assert rc == 0
        res = json.loads(out.read_text())
        assert res["bmo"] == pytest.approx(1.0)
        assert res["constancy:x2_slices"] == pytest.approx(0.0, abs=1e-14)

    def test_sparse_command(self, tmp_path):
        g = Grid1D(0.0, 1.0, 6)
        rng = np.random.default_rng(3)
        vals = rng.uniform(-1, 1, g.n)
        vals -= vals.mean()
        src = tmp_path / "f.csv"
        src.write_text(write_mesh1d_csv(MeshFunction1D(g, vals)))
        out = tmp_path / "tree.json"
        rc = main(["sparse", "--input", str(src), "--out", str(out)])
        assert rc == 0
        tree = json.loads(out.read_text())
        assert {"level", "index", "avg_abs", "piece_sup", "e_set_measure"} == set(tree[0])

    def test_model_command(self, tmp_path, unit_box5):
        rng = np.random.default_rng(4)
        f = MeshFunction(unit_box5, rng.standard_normal(unit_box5.shape))
        src = tmp_path / "f.csv"
        src.write_text(write_mesh_csv(f))
        specp = tmp_path / "spec.json"
        specp.write_text(json.dumps({"kind": "full_paraproduct", "symmetry": "avg_f", "seed": 2}))
        out = tmp_path / "g.csv"
        rc = main(["model", "--spec", str(specp), "--input", str(src), "--out", str(out)])
        assert rc == 0
        from bpcl.lattice import read_mesh_csv

        g = read_mesh_csv(out.read_text())
        assert g.domain == unit_box5

    def test_report_command_exit_code(self, tmp_path):
        # canonical frozen geometry: bands must pass
        cfgp = tmp_path / "cfg.json"
        cfgp.write_text(
            json.dumps(
                config_payload(
                    budgets={"trials": 3, "max_rectangles": 12, "rect_depth": 6}, seed=2025
                )
            )
        )
        out = tmp_path / "report.json"
        rc = main(["report", "--config", str(cfgp), "--out", str(out)])
        assert rc == 0
        body = json.loads(out.read_text())
        assert body["passed"] is True and len(body["checks"]) == 3

    def test_bands_check_command(self, capsys):
        rc = main(["bands", "--groups", "kernels"])
        assert rc == 0
        assert "ok " in capsys.readouterr().out

    def test_bands_regenerate_to_file(self, tmp_path):
        out = tmp_path / "bands.json"
        rc = main(["bands", "--regenerate", "--groups", "kernels", "--out", str(out)])
        assert rc == 0
        fresh = json.loads(out.read_text())
        assert "kernels/size_ratio_max" in fresh

    def test_error_propagates_as_exit(self, tmp_path):
        cfgp = tmp_path / "cfg.json"
        cfgp.write_text(json.dumps(config_payload(domain={"extent": 32.0, "depth": 4})))
        with pytest.raises(SystemExit):
            main(["awf", "--config", str(cfgp)])
