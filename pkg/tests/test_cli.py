import csv
import math
import subprocess
import sys

import pytest

from evstates import cli, core


def read_csv(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = [l for l in lines if l.startswith("#")]
    rows = list(csv.reader(l for l in lines if not l.startswith("#")))
    return header, rows[0], rows[1:]


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, out


class TestExact:
    def test_two_dimensional_midpoint(self, tmp_path):
        code, out = run(tmp_path, "exact", "--n", "2", "--points", "5")
        assert code == 0
        _, cols, rows = read_csv(out)
        assert cols == ["t", "F"]
        table = {float(t): float(f) for t, f in rows}
        assert table[0.75] == 0.5

    def test_starts_at_zero(self, tmp_path):
        for n in (3, 8, 32):
            _, out = run(tmp_path, "exact", "--n", str(n), name=f"{n}.csv")
            _, _, rows = read_csv(out)
            assert float(rows[0][0]) == pytest.approx(1 / n, rel=1e-15)
            assert float(rows[0][1]) == 0.0
            assert float(rows[-1][1]) == 1.0

    def test_gumbel_at_location(self, tmp_path):
        _, out = run(tmp_path, "exact", "--n", "32", "--which", "gumbel")
        _, _, rows = read_csv(out)
        a = math.log(32) / 32
        hit = [float(f) for t, f in rows if float(t) == a]
        assert hit and hit[0] == pytest.approx(math.exp(-1), rel=1e-14)

    @pytest.mark.parametrize("which", ["pdf", "min", "minpdf", "weibull"])
    def test_other_curves(self, tmp_path, which):
        code, out = run(tmp_path, "exact", "--n", "8", "--which", which)
        assert code == 0
        _, cols, rows = read_csv(out)
        assert len(cols) == 2 and len(rows) >= 201

    def test_header_block(self, tmp_path):
        _, out = run(tmp_path, "exact", "--n", "4")
        header, _, _ = read_csv(out)
        assert header[0].startswith("# evstates ")
        assert "# command=exact" in header
        assert "# n=4" in header


def test_moments_rows(tmp_path):
    code, out = run(tmp_path, "moments", "--n", "2,3,32")
    assert code == 0
    _, cols, rows = read_csv(out)
    assert cols == ["n", "mean_max", "second_moment_max", "std_max", "mean_min"]
    assert [r[0] for r in rows] == ["2", "3", "32"]
    assert float(rows[0][1]) == 0.75
    assert float(rows[1][2]) == pytest.approx(85 / 216, rel=1e-15)
    assert float(rows[2][1]) == core.mean_max(32)
    assert float(rows[2][4]) == 1 / 1024


class TestCompare:
    @pytest.fixture(scope="class")
    @staticmethod
    def records(tmp_path_factory):
        out = tmp_path_factory.mktemp("rec") / "sample.csv"
        assert cli.main(["sample", "--n", "32", "--count", "100000", "--seed", "12", "--out", str(out)]) == 0
        return out

    def report(self, path):
        _, _, rows = read_csv(path)
        return {k: v for k, v in rows}

    def test_sampler_against_exact(self, tmp_path, records):
        code, out = run(tmp_path, "compare", "--records", str(records), "--n", "32")
        assert code == 0
        rep = self.report(out)
        assert rep["count"] == "100000" and rep["pass"] == "1"
        assert float(rep["ks_distance"]) <= float(rep["critical_1pct"])
        overlay = tmp_path / "out.overlay.csv"
        _, cols, rows = read_csv(overlay)
        assert cols == ["x", "empirical", "target"] and len(rows) == 50

    def test_sampler_min_against_exact(self, tmp_path, records):
        run(tmp_path, "compare", "--records", str(records), "--n", "32", "--quantity", "min")
        assert self.report(tmp_path / "out.csv")["pass"] == "1"

    def test_sampler_against_gumbel_rejected(self, tmp_path, records):
        # at N=32 the Gumbel limit is far from the finite-N law
        run(tmp_path, "compare", "--records", str(records), "--n", "32", "--target", "gumbel")
        assert self.report(tmp_path / "out.csv")["pass"] == "0"

    def test_wrong_quantity_for_limit(self, tmp_path, records):
        code, _ = run(tmp_path, "compare", "--records", str(records), "--n", "32",
                      "--target", "gumbel", "--quantity", "min")
        assert code == 1

    def test_rotor_records(self, tmp_path):
        rec = tmp_path / "rotor.csv"
        assert cli.main(["rotor", "--k-count", "10", "--seed", "1", "--out", str(rec)]) == 0
        _, cols, rows = read_csv(rec)
        assert cols == ["K", "alpha", "beta", "eig_index", "max", "min"] and len(rows) == 320
        code, out = run(tmp_path, "compare", "--records", str(rec), "--n", "32", "--quantity", "min")
        assert code == 0
        assert int(self.report(out)["count"]) == 320

    def test_missing_columns(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code, _ = run(tmp_path, "compare", "--records", str(bad), "--n", "8")
        assert code == 1


class TestExitCodes:
    def test_invalid_dimension(self, tmp_path):
        assert run(tmp_path, "exact", "--n", "1", "--which", "pdf")[0] == 1
        assert run(tmp_path, "moments", "--n", "0")[0] == 1

    def test_missing_file(self, tmp_path):
        assert run(tmp_path, "compare", "--records", str(tmp_path / "nope.csv"), "--n", "8")[0] == 1

    def test_time_reversal_guard(self, tmp_path):
        assert run(tmp_path, "rotor", "--beta", "0.5", "--seed", "0", "--k-count", "1")[0] == 1
        assert run(tmp_path, "rotor", "--beta", "0.5", "--seed", "0", "--k-count", "1", "--allow-symmetric")[0] == 0

    def test_numerical_failure(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise core.PrecisionLossError("forced", bound=1.0)

        monkeypatch.setattr(core, "max_cdf", boom)
        assert run(tmp_path, "exact", "--n", "8")[0] == 2

    def test_missing_seed_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["sample", "--n", "4"])
        assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "evstates", "exact", "--n", "2", "--points", "3", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().splitlines()[-1] == "1,1"


COMMANDS = [
    ["exact", "--n", "32", "--which", "pdf"],
    ["moments", "--n", "2,3,8,32,128"],
    ["sample", "--n", "8", "--count", "70000", "--seed", "5", "--workers", "3"],
    ["rotor", "--n", "16", "--k-count", "6", "--alpha-jitter", "0.1", "--seed", "9", "--workers", "2"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: a[0])
def test_rerun_is_byte_identical(tmp_path, argv):
    out = tmp_path / "run.csv"
    assert cli.main([*argv, "--out", str(out)]) == 0
    first = out.read_bytes()
    assert cli.main([*argv, "--out", str(out)]) == 0
    assert out.read_bytes() == first
