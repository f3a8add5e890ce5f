import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssvh.cli import main
from ssvh.errors import InputError
from ssvh.io import (
    read_edge_list,
    read_indexed_rows,
    read_matrix,
    read_triplets,
    write_indexed_rows,
    write_matrix,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False)


def _write_labels(path, idx, P):
    write_indexed_rows(path, np.asarray(idx) - 1, P, prefix="pi")


class TestMatrixIO:
    @settings(max_examples=30, deadline=None)
    @given(r=st.integers(1, 5), c=st.integers(1, 5), data=st.data())
    def test_csv_round_trip_exact(self, tmp_path_factory, r, c, data):
        M = np.array(data.draw(st.lists(finite, min_size=r * c, max_size=r * c))).reshape(r, c)
        path = tmp_path_factory.mktemp("m") / "M.csv"
        write_matrix(path, M)
        np.testing.assert_array_equal(read_matrix(path), M)

    def test_json(self, tmp_path):
        path = tmp_path / "M.json"
        path.write_text(json.dumps({"rows": 2, "cols": 2, "data": [1, 2, 3, 4]}))
        np.testing.assert_array_equal(read_matrix(path), [[1, 2], [3, 4]])
        path.write_text(json.dumps({"rows": 2, "cols": 3, "data": [1, 2, 3, 4]}))
        with pytest.raises(InputError, match="entries"):
            read_matrix(path)

    def test_malformed_csv(self, tmp_path):
        path = tmp_path / "M.csv"
        path.write_text("1,2\n3,x\n")
        with pytest.raises(InputError, match=":2:"):
            read_matrix(path)
        path.write_text("1,2\n3\n")
        with pytest.raises(InputError, match="columns"):
            read_matrix(path)
        with pytest.raises(InputError):
            read_matrix(tmp_path / "absent.csv")

    def test_indexed_rows_round_trip(self, tmp_path):
        P = np.array([[0.25, 0.75], [1.0, 0.0]])
        write_indexed_rows(tmp_path / "l.csv", [4, 0], P)
        idx, Q = read_indexed_rows(tmp_path / "l.csv")
        np.testing.assert_array_equal(idx, [4, 0])
        np.testing.assert_array_equal(Q, P)

    def test_indexed_rows_errors(self, tmp_path):
        path = tmp_path / "l.csv"
        path.write_text("1,0.5,0.5\n0,1,0\n")
        with pytest.raises(InputError, match="1-based"):
            read_indexed_rows(path)
        path.write_text("1,0.5,0.5\nz,1,0\n")
        with pytest.raises(InputError, match=":2:"):
            read_indexed_rows(path)


class TestEdgeList:
    def test_symmetric_with_weights(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("# comment\n1 2\n2,3,0.5\n\n3 3 2.0  # self loop\n")
        A = read_edge_list(path).toarray()
        np.testing.assert_array_equal(A, [[0, 1, 0], [1, 0, 0.5], [0, 0.5, 2.0]])
        assert read_edge_list(path, n=5).shape == (5, 5)
        with pytest.raises(InputError, match="exceeds"):
            read_edge_list(path, n=2)

    def test_malformed_line_number(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("1 2\n2 3\n2 three\n")
        with pytest.raises(InputError, match=r"e\.txt:3:"):
            read_edge_list(path)
        path.write_text("1 2 3 4\n")
        with pytest.raises(InputError, match=":1:"):
            read_edge_list(path)


class TestTriplets:
    def test_read(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("word,doc,count\n1,1,3\n2,2,1\n1,2,2\n")
        np.testing.assert_array_equal(read_triplets(path).toarray(), [[3, 2], [0, 1]])
        path.write_text("1,1,-3\n")
        with pytest.raises(InputError):
            read_triplets(path)


class TestCliFixtures:
    def test_vh(self, fixtures_dir, tmp_path):
        d = fixtures_dir / "vh_noiseless"
        rc = main(["vh", "--x", str(d / "X.csv"), "--labels", str(d / "labels.csv"),
                   "--k", "3", "--out", str(tmp_path)])
        assert rc == 0
        V_hat = read_matrix(tmp_path / "vertices.csv")
        np.testing.assert_allclose(V_hat, read_matrix(d / "V.csv"), atol=1e-7)
        fit = json.loads((tmp_path / "fit.json").read_text())
        assert fit["method"] == "ssvh" and len(fit["b_hat"]) == 3

    def test_vh_projection_alpha(self, fixtures_dir, tmp_path):
        d = fixtures_dir / "vh_noiseless"
        rc = main(["vh", "--x", str(d / "X.csv"), "--labels", str(d / "labels.csv"),
                   "--k", "3", "--alpha", "projection", "--out", str(tmp_path)])
        assert rc == 0
        np.testing.assert_allclose(read_matrix(tmp_path / "vertices.csv"), read_matrix(d / "V.csv"), atol=1e-7)

    def test_vh_sp_ignores_labels(self, fixtures_dir, tmp_path):
        d = fixtures_dir / "vh_noiseless"
        rc = main(["vh", "--x", str(d / "X.csv"), "--labels", str(tmp_path / "nonexistent.csv"),
                   "--k", "3", "--method", "sp", "--out", str(tmp_path)])
        assert rc == 0
        assert json.loads((tmp_path / "fit.json").read_text())["method"] == "sp"

    def test_mme(self, fixtures_dir, tmp_path):
        d = fixtures_dir / "mme_noiseless"
        rc = main(["mme", "--edges", str(d / "omega_edges.txt"), "--labels", str(d / "labels.csv"),
                   "--k", "3", "--out", str(tmp_path)])
        assert rc == 0
        got_idx, got = read_indexed_rows(tmp_path / "memberships.csv")
        ref_idx, ref = read_indexed_rows(d / "memberships.csv")
        S, _ = read_indexed_rows(d / "labels.csv")
        # every unlabeled node is estimated
        np.testing.assert_array_equal(got_idx, np.setdiff1d(ref_idx, S))
        np.testing.assert_allclose(got, ref[got_idx], atol=1e-8)

    def test_mme_zero_degree_node(self, fixtures_dir, tmp_path):
        d = fixtures_dir / "mme_noiseless"
        rc = main(["mme", "--edges", str(d / "omega_edges.txt"), "--labels", str(d / "labels.csv"),
                   "--k", "3", "--n", "151", "--out", str(tmp_path)])
        assert rc == 0
        idx, P = read_indexed_rows(tmp_path / "memberships.csv")
        assert idx[-1] == 150 and np.isnan(P[-1]).all()
        assert json.loads((tmp_path / "fit.json").read_text())["missing_nodes"] == [151]

    def test_topics(self, fixtures_dir, tmp_path):
        d = fixtures_dir / "topics_noiseless"
        rc = main(["topics", "--counts", str(d / "counts.csv"), "--loadings", str(d / "loadings.csv"),
                   "--k", "3", "--out", str(tmp_path)])
        assert rc == 0
        A = read_matrix(d / "A.csv")
        np.testing.assert_allclose(read_matrix(tmp_path / "topics_raw.csv"), A, atol=1e-8)
        np.testing.assert_allclose(read_matrix(tmp_path / "topics.csv").sum(axis=0), 1.0, atol=1e-12)

    def test_topics_zero_count_label(self, fixtures_dir, tmp_path):
        d = fixtures_dir / "topics_noiseless"
        loadings = (d / "loadings.csv").read_text() + "500,0.2,0.3,0.5\n"
        (tmp_path / "l.csv").write_text(loadings)
        rc = main(["topics", "--counts", str(d / "counts.csv"), "--loadings", str(tmp_path / "l.csv"),
                   "--k", "3", "--out", str(tmp_path)])
        assert rc == 2


class TestCliErrors:
    def test_missing_labels_names_flag(self, fixtures_dir, tmp_path, capsys):
        rc = main(["vh", "--x", str(fixtures_dir / "vh_noiseless" / "X.csv"), "--k", "3",
                   "--out", str(tmp_path)])
        assert rc == 2
        assert "--labels" in capsys.readouterr().err

    def test_malformed_edge_line(self, fixtures_dir, tmp_path, capsys):
        (tmp_path / "e.txt").write_text("1 2\n2 x\n")
        rc = main(["mme", "--edges", str(tmp_path / "e.txt"),
                   "--labels", str(fixtures_dir / "mme_noiseless" / "labels.csv"), "--k", "3",
                   "--out", str(tmp_path)])
        assert rc == 2
        assert "e.txt:2:" in capsys.readouterr().err

    def test_unknown_scheme(self, tmp_path, capsys):
        (tmp_path / "c.json").write_text(json.dumps({"id": "x", "weight_scheme": "zipf"}))
        assert main(["simulate", str(tmp_path / "c.json"), "--out", str(tmp_path)]) == 2
        assert "zipf" in capsys.readouterr().err

    def test_missing_k(self, fixtures_dir):
        with pytest.raises(SystemExit) as exc:
            main(["vh", "--x", str(fixtures_dir / "vh_noiseless" / "X.csv")])
        assert exc.value.code == 2

    def test_numerical_error_exit_3(self, tmp_path):
        # collinear points with pure labels: the labeled design is degenerate
        write_matrix(tmp_path / "X.csv", np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.2, 0.3]]))
        _write_labels(tmp_path / "l.csv", [1, 2, 3, 4], np.eye(3)[[0, 1, 2, 0]])
        rc = main(["vh", "--x", str(tmp_path / "X.csv"), "--labels", str(tmp_path / "l.csv"),
                   "--k", "3", "--out", str(tmp_path)])
        assert rc == 3

    def test_bad_tol_file(self, fixtures_dir, tmp_path):
        (tmp_path / "t.json").write_text('{"no_such_tolerance": 1}')
        d = fixtures_dir / "vh_noiseless"
        rc = main(["vh", "--x", str(d / "X.csv"), "--labels", str(d / "labels.csv"), "--k", "3",
                   "--tol-file", str(tmp_path / "t.json"), "--out", str(tmp_path)])
        assert rc == 2


class TestCliValidate:
    def test_well_posed(self, fixtures_dir, tmp_path, capsys):
        d = fixtures_dir / "vh_noiseless"
        rc = main(["validate", "--labels", str(d / "labels.csv"), "--x", str(d / "X.csv"),
                   "--k", "3", "--out", str(tmp_path)])
        report = json.loads(capsys.readouterr().out)
        assert rc == 0 and report["passed"]
        assert {c["name"] for c in report["checks"]} == {"label_spread", "sigma_rank_proxy", "eigengap",
                                                         "b_positive"}
        assert json.loads((tmp_path / "validate.json").read_text()) == report

    def test_rank_deficient(self, tmp_path, capsys):
        P = np.array([[0.2, 0.8, 0.0], [0.5, 0.5, 0.0], [0.9, 0.1, 0.0], [0.4, 0.6, 0.0], [0.7, 0.3, 0.0]])
        _write_labels(tmp_path / "l.csv", range(1, 6), P)
        rc = main(["validate", "--labels", str(tmp_path / "l.csv")])
        report = json.loads(capsys.readouterr().out)
        assert rc == 3
        spread = next(c for c in report["checks"] if c["name"] == "label_spread")
        assert not spread["passed"] and "Assumption 1(b)" in spread["detail"]

    def test_identical_labels(self, tmp_path, capsys):
        _write_labels(tmp_path / "l.csv", range(1, 7), np.tile([0.2, 0.3, 0.5], (6, 1)))
        rc = main(["validate", "--labels", str(tmp_path / "l.csv")])
        report = json.loads(capsys.readouterr().out)
        proxy = next(c for c in report["checks"] if c["name"] == "sigma_rank_proxy")
        assert rc == 3 and proxy["value"] == 0


class TestCliSimulate:
    def test_summary_rows_and_idempotent(self, fixtures_dir, tmp_path):
        cfg = json.loads((fixtures_dir / "configs" / "experiment1.json").read_text())
        cfg.update(reps=5, methods=["ssvh", "sp", "svs"])
        (tmp_path / "c.json").write_text(json.dumps(cfg))
        for name in ("a", "b"):
            assert main(["simulate", "--config", str(tmp_path / "c.json"), "--threads", "2",
                         "--out", str(tmp_path / name)]) == 0
        lines = (tmp_path / "a" / "summary.csv").read_text().splitlines()
        assert [ln.split(",")[0] for ln in lines[2:]] == ["ssvh", "sp", "svs"]
        for f in ("records.csv", "summary.csv"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_vh_idempotent(self, fixtures_dir, tmp_path):
        d = fixtures_dir / "vh_noiseless"
        for name in ("a", "b"):
            main(["vh", "--x", str(d / "X.csv"), "--labels", str(d / "labels.csv"), "--k", "3",
                  "--alpha", "projection", "--seed", "4", "--out", str(tmp_path / name)])
        for f in ("vertices.csv", "fit.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


class TestCliProcess:
    def _run(self, args, level):
        env = dict(os.environ, SSVH_LOG=level)
        return subprocess.run([sys.executable, "-m", "ssvh.cli", *args], capture_output=True, text=True,
                              env=env, timeout=120)

    def test_log_levels(self, fixtures_dir, tmp_path):
        d = fixtures_dir / "vh_noiseless"
        args = ["vh", "--x", str(d / "X.csv"), "--labels", str(d / "labels.csv"), "--k", "3",
                "--method", "sp", "--out", str(tmp_path)]
        quiet = self._run(args, "error")
        chatty = self._run(args, "info")
        assert quiet.returncode == chatty.returncode == 0
        assert "ignored" not in quiet.stderr
        assert "ignored" in chatty.stderr

    def test_exit_code_in_subprocess(self, tmp_path):
        res = self._run(["mme", "--edges", str(tmp_path / "none.txt"), "--labels", str(tmp_path / "x"),
                         "--k", "2"], "warn")
        assert res.returncode == 2 and "--edges" in res.stderr
