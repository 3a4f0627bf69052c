import io
import json

import numpy as np
import pytest

from qubitplt import cli, states
from qubitplt.harness import Family, sweep


def write_state(path, rho, label=None):
    doc = {"re": np.real(rho).tolist(), "im": np.imag(rho).tolist()}
    if label:
        doc["label"] = label
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestAnalyze:
    def test_singlet(self, tmp_path, capsys):
        path = write_state(tmp_path / "s.json", states.projector(states.SINGLET), "singlet")
        code, out, _ = run(["analyze", path, "--json"], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["T"] == pytest.approx(-2.0)
        np.testing.assert_allclose(report["lambda"], [1, 1, 1, 1], atol=1e-12)
        assert {report[k]["label"] for k in ("plt", "ppt", "ccn", "concurrence")} == {"entangled"}

    def test_maximally_mixed_text(self, tmp_path, capsys):
        path = write_state(tmp_path / "m.json", np.eye(4) / 4)
        code, out, _ = run(["analyze", path], capsys)
        assert code == 0
        assert "T: 1 " in out
        assert "PLT:         separable" in out
        assert "B (Lorentz square):" in out

    def test_non_hermitian(self, tmp_path, capsys):
        rho = np.eye(4) / 4 + 0j
        rho[0, 1] = 0.2
        code, _, err = run(["analyze", write_state(tmp_path / "b.json", rho)], capsys)
        assert code == 2
        assert "residual" in err

    def test_not_psd(self, tmp_path, capsys):
        code, _, _ = run(["analyze", write_state(tmp_path / "n.json", np.diag([1.0, 1, 1, -1]))], capsys)
        assert code == 2

    @pytest.mark.parametrize("text", ["not json", '{"re": [[1]]}', '{"re": [[1,0],[0,1]], "im": [[0,0],[0,0]]}'])
    def test_malformed(self, tmp_path, capsys, text):
        path = tmp_path / "x.json"
        path.write_text(text)
        assert run(["analyze", str(path)], capsys)[0] == 2

    def test_missing_file(self, tmp_path, capsys):
        assert run(["analyze", str(tmp_path / "nope.json")], capsys)[0] == 1


class TestSweep:
    def test_werner_to_file(self, tmp_path, capsys):
        out_path = tmp_path / "w.csv"
        code, out, _ = run(["sweep", "--family", "werner", "--lo", "0", "--hi", "1", "--steps", "101", "--out", str(out_path)], capsys)
        assert code == 0
        assert "rows: 101" in out
        assert "between 0.33000000000000002 and 0.34000000000000002" in out
        raw = out_path.read_bytes()
        assert b"\r" not in raw
        header = raw.decode().splitlines()[0]
        assert header == ",".join(cli.CSV_COLUMNS)

    def test_round_trip(self, tmp_path, capsys):
        out_path = tmp_path / "r.csv"
        run(["sweep", "--family", "rudolph", "--r", "0.25", "--s", "0.5", "--lo", "0", "--hi", "0.25", "--steps", "26", "--out", str(out_path)], capsys)
        with open(out_path, encoding="utf-8", newline="") as fh:
            rows = cli.read_csv(fh)
        assert rows == sweep(Family("rudolph", 0.25, 0.5), 0.0, 0.25, 26)
        assert all(r.T < 0 for r in rows[1:]) and rows[0].T == 0.0

    def test_stdout_csv(self, capsys):
        code, out, err = run(["sweep", "--family", "singlet_polarized", "--lo", "0", "--hi", "1", "--steps", "11"], capsys)
        assert code == 0
        rows = cli.read_csv(io.StringIO(out))
        for row in rows:
            assert row.T == pytest.approx(-2 * row.param, abs=1e-10)
        assert "rows: 11" in err

    def test_verdict_tokens(self, capsys):
        _, out, _ = run(["sweep", "--family", "werner", "--lo", "0", "--hi", "1", "--steps", "4"], capsys)
        tokens = {r.plt_verdict for r in cli.read_csv(io.StringIO(out))}
        assert tokens <= {"separable", "entangled", "boundary", "inconclusive"}

    @pytest.mark.parametrize(
        "argv, code",
        [
            (["sweep", "--family", "rudolph", "--lo", "0", "--hi", "0.1"], 1),
            (["sweep", "--family", "werner", "--lo", "1", "--hi", "0"], 1),
            (["sweep", "--family", "bell", "--lo", "0", "--hi", "1"], 1),
            (["sweep", "--family", "werner", "--lo", "0", "--hi", "2"], 2),
            (["sweep", "--family", "rudolph", "--r", "0.25", "--s", "0.5", "--lo", "0", "--hi", "0.9"], 2),
        ],
    )
    def test_errors(self, capsys, argv, code):
        assert run(argv, capsys)[0] == code


class TestRandom:
    def test_small_batch(self, capsys):
        code, out, _ = run(["random", "--ensemble", "ginibre", "-n", "200", "--seed", "42"], capsys)
        assert code == 0
        summary = json.loads(out.strip().splitlines()[-1])
        assert summary["total"] == 200 and summary["disagree"] == 0

    def test_json_only(self, capsys):
        _, out, _ = run(["random", "-n", "10", "--json"], capsys)
        assert json.loads(out)["ensemble"] == "ginibre"

    def test_zero_states(self, capsys):
        assert run(["random", "--ensemble", "ginibre", "-n", "0"], capsys)[0] == 1

    def test_claim_failure_exit(self, capsys, monkeypatch):
        from qubitplt import linalg

        monkeypatch.setattr(linalg, "MAX_QR_ITERATIONS", 0)
        assert run(["random", "-n", "50", "--seed", "2"], capsys)[0] == 4

    def test_unknown_flag(self, capsys):
        assert run(["random", "--bogus"], capsys)[0] == 1


class TestSelftest:
    def test_passes_and_is_repeatable(self, capsys):
        code, first, _ = run(["selftest"], capsys)
        assert code == 0
        assert "FAIL" not in first
        assert run(["selftest"], capsys)[1] == first

    def test_failure_exit(self, capsys, monkeypatch):
        from qubitplt import selftest

        monkeypatch.setattr(cli, "run_selftest", lambda: selftest.run_selftest(metric=np.eye(4)))
        code, out, _ = run(["selftest"], capsys)
        assert code == 4
        assert "FAIL" in out


def test_no_command(capsys):
    assert run([], capsys)[0] == 1
    assert run(["--help"], capsys)[0] == 0


def test_numerical_failure_exit(tmp_path, capsys, monkeypatch):
    from qubitplt import linalg

    monkeypatch.setattr(linalg, "MAX_QR_ITERATIONS", 0)
    path = write_state(tmp_path / "g.json", states.random_ginibre(1))
    assert run(["analyze", path], capsys)[0] == 3
