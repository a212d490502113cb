"""End-to-end checks of the ergocert command line tool.

Usage: test_cli.py <path-to-ergocert> <fixtures-dir>
"""

import csv
import filecmp
import json
import math
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

EXE = None
FIXTURES = None


def run(*args):
    return subprocess.run([EXE, *args], capture_output=True, text=True, check=False)


def read_csv(path):
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    assert lines[0].startswith("# seed="), lines[0]
    return list(csv.DictReader(lines[1:]))


class CliTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_verify_family_passes(self):
        out = self.tmp / "fam"
        res = run("verify", "--input", str(FIXTURES / "two_state_family.json"), "--out", str(out))
        self.assertEqual(res.returncode, 0, res.stdout + res.stderr)
        summary = json.loads((out / "summary.json").read_text())
        self.assertTrue(summary["pass"])
        tables = sorted(out.glob("deviation_chain*_x*.csv"))
        self.assertEqual(len(tables), 6)
        for t in tables:
            rows = read_csv(t)
            self.assertEqual(len(rows), 501)
            for r in rows:
                self.assertEqual(r["dominated"], "1")
                # slack is bound - deviation; a string means it left the double range upward.
                try:
                    self.assertGreaterEqual(float(r["slack"]), 0.0)
                except ValueError:
                    self.assertNotIn("-", r["slack"].split("e")[0])

    def test_bad_row_sum_is_invalid_input(self):
        out = self.tmp / "bad"
        res = run("verify", "--input", str(FIXTURES / "bad_row_sum.json"), "--out", str(out))
        self.assertEqual(res.returncode, 2)
        err = json.loads(res.stdout)
        self.assertEqual(err["error"]["kind"], "invalid_input")
        self.assertIn("row 1", err["error"]["message"])
        self.assertEqual(json.loads((out / "error.json").read_text()), err)

    def test_missing_input_file(self):
        res = run("renewal", "--input", str(self.tmp / "nope.json"), "--out", str(self.tmp / "o"))
        self.assertEqual(res.returncode, 2)
        self.assertEqual(json.loads(res.stdout)["error"]["kind"], "invalid_input")

    def test_wrong_kind_for_command(self):
        res = run("renewal", "--input", str(FIXTURES / "ou.json"), "--out", str(self.tmp / "o"))
        self.assertEqual(res.returncode, 2)

    def test_renewal_geometric_half_is_constant(self):
        out = self.tmp / "g"
        res = run("renewal", "--input", str(FIXTURES / "geometric_q05.json"), "--out", str(out))
        self.assertEqual(res.returncode, 0, res.stdout + res.stderr)
        rows = read_csv(out / "renewal_u.csv")
        self.assertEqual(float(rows[0]["u"]), 1.0)
        for r in rows[1:]:
            self.assertEqual(float(r["u"]), 0.5)

    def test_bound_curve_ratio(self):
        out = self.tmp / "t"
        res = run("renewal", "--input", str(FIXTURES / "truncated_geometric_30.json"), "--out", str(out))
        self.assertEqual(res.returncode, 0, res.stdout + res.stderr)
        ledger = json.loads((out / "ledger.json").read_text())
        kappa = float(ledger["kappa"])
        rows = read_csv(out / "bound_curve.csv")
        logs = [float(r["log_bound"]) for r in rows]
        for a, b in zip(logs, logs[1:]):
            # bound(n+1) / bound(n) = e^{-kappa} to 1e-12 relative.
            self.assertLessEqual(abs(math.expm1(b - a + kappa)), 1e-12)
        for r in rows:
            self.assertGreaterEqual(float(r["bound"]), 0.0)

    def _twice(self, *args):
        a, b = self.tmp / "a", self.tmp / "b"
        ra = run(*args, "--out", str(a))
        rb = run(*args, "--out", str(b))
        self.assertEqual(ra.returncode, 0, ra.stdout + ra.stderr)
        self.assertEqual(rb.returncode, 0)
        names = sorted(p.name for p in a.iterdir())
        self.assertEqual(names, sorted(p.name for p in b.iterdir()))
        match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
        self.assertEqual(mismatch + errors, [])
        return a

    def test_rerun_is_byte_identical(self):
        self._twice("simulate", "--input", str(FIXTURES / "geometric_q05.json"), "--paths", "2000",
                    "--seed", "7")
        self._twice("verify", "--input", str(FIXTURES / "ou.json"), "--paths", "500", "--n-max", "3",
                    "--seed", "11")
        a = self._twice("certify-chain", "--input", str(FIXTURES / "two_state_family.json"),
                        "--seed", "3")
        self.assertEqual(json.loads((a / "certificate.json").read_text())["seed"], 3)

    def test_seed_changes_simulation(self):
        args = ["simulate", "--input", str(FIXTURES / "two_state_family.json"), "--n-max", "50"]
        run(*args, "--seed", "1", "--out", str(self.tmp / "s1"))
        run(*args, "--seed", "2", "--out", str(self.tmp / "s2"))
        self.assertNotEqual((self.tmp / "s1" / "paths.csv").read_text(),
                            (self.tmp / "s2" / "paths.csv").read_text())

    def test_json_format(self):
        out = self.tmp / "j"
        res = run("renewal", "--input", str(FIXTURES / "uniform_1_3.json"), "--out", str(out),
                  "--format", "json", "--n-max", "10")
        self.assertEqual(res.returncode, 0)
        table = json.loads((out / "renewal_u.json").read_text())
        self.assertEqual(table["columns"], ["n", "u"])
        self.assertEqual(len(table["rows"]), 11)
        self.assertAlmostEqual(table["rows"][1][1], 1.0 / 3.0, places=15)

    def test_certify_diffusion(self):
        out = self.tmp / "d"
        res = run("certify-diffusion", "--input", str(FIXTURES / "ou.json"), "--out", str(out))
        self.assertEqual(res.returncode, 0, res.stdout + res.stderr)
        cert = json.loads((out / "certificate.json").read_text())
        self.assertEqual(cert["lyapunov"]["gamma"], 0.25)
        self.assertEqual(cert["lyapunov"]["x_star"], 4.0)
        self.assertEqual(cert["lyapunov"]["grid_violations"], 0)
        # kappa is far below the double range and is written as exp(<log>).
        self.assertTrue(cert["certificate"]["kappa"].startswith("exp(-"))


if __name__ == "__main__":
    EXE = sys.argv[1]
    FIXTURES = Path(sys.argv[2])
    unittest.main(argv=sys.argv[:1], verbosity=2)
