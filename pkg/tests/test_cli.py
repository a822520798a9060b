import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from spdkit import MatrixBundle, counterexample_bundle, parse_bundle, random_spd, s_div, write_bundle
from spdkit.cli import format_value, main


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


@pytest.fixture
def files(tmp_path):
    def single(name, M):
        path = tmp_path / name
        write_bundle(MatrixBundle(len(M), (("A", np.array(M, dtype=float)),)), path)
        return str(path)

    paths = {
        "I": single("i.json", np.eye(2)),
        "F": single("f.json", 4 * np.eye(2)),
        "I3": single("i3.json", np.eye(3)),
        "ce": str(tmp_path / "ce.json"),
        "pair": str(tmp_path / "pair.json"),
        "same": str(tmp_path / "same.json"),
        "hard": str(tmp_path / "hard.json"),
        "dir": tmp_path,
    }
    write_bundle(counterexample_bundle(), paths["ce"])
    write_bundle(MatrixBundle.from_matrices([np.diag([1.0]), np.diag([4.0])]), paths["pair"])
    A = random_spd(3, 0, 50.0)
    write_bundle(MatrixBundle.from_matrices([A, A]), paths["same"])
    write_bundle(MatrixBundle.from_matrices([random_spd(4, k, 1e3) for k in range(5)]), paths["hard"])
    return paths


class TestFormat:
    @pytest.mark.parametrize(
        "x,text",
        [
            (0.0, "0.000000000000000"),
            (0.44628710262841953, "0.446287102628420"),
            (1.9605162869370917, "1.96051628693709"),
            (-2.5, "-2.50000000000000"),
        ],
    )
    def test_fifteen_significant_digits(self, x, text):
        assert format_value(x) == text


class TestDist:
    def test_zero(self, files):
        assert run(["dist", "sdiv", files["I"], files["I"]]) == (0, "0.000000000000000\n")

    def test_sdiv(self, files):
        code, out = run(["dist", "sdiv", files["I"], files["F"]])
        assert code == 0 and out == "0.446287102628420\n"

    def test_matches_library_to_last_digit(self, files):
        A = parse_bundle(files["I"]).matrices[0]
        B = parse_bundle(files["F"]).matrices[0]
        assert run(["dist", "sdiv", files["I"], files["F"]])[1].strip() == format_value(s_div(A, B))

    def test_riem(self, files):
        code, out = run(["dist", "riem", files["I"], files["F"]])
        assert code == 0 and out.startswith("1.96051")

    @pytest.mark.parametrize("metric", ["sdelta", "logeuclid", "thompson", "stein_loss", "vonneumann"])
    def test_other_metrics(self, files, metric):
        code, out = run(["dist", metric, files["I"], files["F"]])
        assert code == 0 and float(out) > 0

    def test_dimension_mismatch(self, files):
        assert run(["dist", "sdiv", files["I"], files["I3"]])[0] == 2

    def test_missing_file(self, files):
        assert run(["dist", "sdiv", files["I"], str(files["dir"] / "nope.json")])[0] == 2

    def test_multi_item_bundle_rejected(self, files):
        assert run(["dist", "sdiv", files["ce"], files["I"]])[0] == 2

    def test_unknown_metric(self, files):
        assert run(["dist", "cosine", files["I"], files["I"]])[0] == 2


class TestMean:
    def test_sdiv_pair(self, files):
        out_path = files["dir"] / "m.json"
        code, out = run(["mean", "sdiv", files["pair"], "--out", str(out_path)])
        assert code == 0 and "converged" in out
        np.testing.assert_allclose(parse_bundle(out_path).matrices[0].data, [[2.0]], atol=1e-10)

    def test_gm2_same(self, files):
        out_path = files["dir"] / "g.json"
        assert run(["mean", "gm2", files["same"], "--out", str(out_path)])[0] == 0
        A = parse_bundle(files["same"]).matrices[0].data
        np.testing.assert_allclose(parse_bundle(out_path).matrices[0].data, A, rtol=1e-10)

    def test_gm2_needs_two(self, files):
        assert run(["mean", "gm2", files["ce"]])[0] == 2

    def test_budget_exhaustion(self, files):
        code, out = run(["mean", "sdiv", files["hard"], "--max-iters", "1"])
        assert code == 4 and "iterations=1" in out and "not converged" in out

    @pytest.mark.parametrize("kind", ["karcher", "logeuclid"])
    def test_other_kinds(self, files, kind):
        code, out = run(["mean", kind, files["ce"]])
        assert code == 0 and len(out.splitlines()) == 3


class TestKernel:
    def test_counterexample(self, files):
        code, out = run(["kernel", files["ce"], "--beta", "0.1"])
        assert code == 5 and "psd=no" in out
        min_eig = float(out.split("min_eig=")[1].split()[0])
        assert min_eig == pytest.approx(-0.0017, abs=2e-4)

    def test_admissible(self, files):
        code, out = run(["kernel", files["ce"], "--beta", "0.5", "--variant", "normalized"])
        assert code == 0 and "psd=yes" in out and "beta_admissible=yes" in out

    def test_single(self, files):
        assert run(["kernel", files["I"], "--beta", "0.1"])[0] == 0

    def test_bad_beta(self, files):
        assert run(["kernel", files["I"], "--beta", "-1"])[0] == 2


class TestSearch:
    def test_found(self, files):
        out_path = files["dir"] / "w.json"
        code, out = run(["search", "--n", "2", "--beta", "0.1", "--out", str(out_path)])
        assert code == 5 and len(parse_bundle(out_path)) == 5

    def test_inconclusive(self):
        code, out = run(["search", "--n", "2", "--beta", "0.5", "--budget", "50"])
        assert code == 0 and "inconclusive" in out


class TestLaws:
    def test_single_law(self):
        code, out = run(["laws", "--law", "power_contraction", "--trials", "1000"])
        assert code == 0 and "1/1 laws passed" in out

    def test_json(self, files):
        path = files["dir"] / "r.json"
        code, _ = run(["laws", "--law", "sandwich", "--trials", "10", "--dims", "2,3", "--json", str(path)])
        doc = json.loads(path.read_text())
        assert code == 0 and doc["dims"] == [2, 3] and doc["reports"][0]["passed"]

    def test_all(self):
        code, out = run(["laws", "--trials", "2"])
        assert code == 0 and "21/21 laws passed" in out

    def test_unknown_law(self):
        assert run(["laws", "--law", "nope"])[0] == 2

    def test_bad_trials(self):
        assert run(["laws", "--law", "sandwich", "--trials", "0"])[0] == 2

    def test_violation_exit_code(self, monkeypatch):
        from spdkit import laws

        law = laws.REGISTRY["sandwich"]
        monkeypatch.setitem(laws.REGISTRY, "sandwich", laws._Law(law.sample, lambda v: [1.0], law.summary))
        code, out = run(["laws", "--law", "sandwich", "--trials", "2"])
        assert code == 6 and "witness sandwich" in out

    def test_env_seed(self, monkeypatch, files):
        a, b = files["dir"] / "a.json", files["dir"] / "b.json"
        monkeypatch.setenv("SPDKIT_SEED", "42")
        run(["laws", "--law", "sandwich", "--trials", "3", "--json", str(a)])
        run(["laws", "--law", "sandwich", "--trials", "3", "--seed", "42", "--json", str(b)])
        assert json.loads(a.read_text())["seed"] == 42
        assert json.loads(a.read_text())["reports"] == json.loads(b.read_text())["reports"]

    def test_bad_env_seed(self, monkeypatch):
        monkeypatch.setenv("SPDKIT_SEED", "abc")
        assert run(["laws", "--law", "sandwich", "--trials", "1"])[0] == 2


class TestBench:
    def test_csv(self, files):
        path = files["dir"] / "b.csv"
        code, _ = run(["bench", "--op", "dist_sdiv,dist_riem", "--dims", "4,8", "--reps", "1", "--out", str(path)])
        rows = list(csv.reader(path.open()))
        assert code == 0
        assert rows[0] == ["op", "n", "m", "median_s", "p10_s", "p90_s", "reps"]
        assert len(rows) == 5
        for row in rows[1:]:
            assert row[3] == row[4] == row[5]

    def test_bad_op(self):
        assert run(["bench", "--op", "dist_foo"])[0] == 2
        assert run(["bench", "--reps", "0"])[0] == 2
        assert run(["bench", "--dims", "a"])[0] == 2


def test_module_entry_point(files):
    p = subprocess.run(
        [sys.executable, "-m", "spdkit", "dist", "sdiv", files["I"], files["F"]],
        capture_output=True,
        text=True,
    )
    assert p.returncode == 0 and p.stdout == "0.446287102628420\n"


def test_usage_error_exit_code():
    p = subprocess.run([sys.executable, "-m", "spdkit"], capture_output=True, text=True)
    assert p.returncode == 2
