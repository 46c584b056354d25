"""End-to-end checks of the divcorr command line."""

import json
import os
import subprocess
import sys
import unittest
from pathlib import Path

import jsonschema

BINARY, SCHEMAS, DATA = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("DIVCORR_THREADS", None)
    full_env.update(env or {})
    return subprocess.run([BINARY, "--quiet", *args], capture_output=True, text=True, env=full_env)


def schema(name):
    return json.loads((SCHEMAS / name).read_text())


class Cli(unittest.TestCase):
    def test_correlate_matches_schema_and_limit(self):
        r = run("--format", "json", "correlate", "--a", "1", "--b", "2", "--X", "1e5")
        self.assertEqual(r.returncode, 0, r.stderr)
        out = json.loads(r.stdout)
        jsonschema.validate(out, schema("moment_series.schema.json"))
        self.assertAlmostEqual(out["limit"], 0.4834, places=4)
        self.assertEqual(out["grid"][-1], 1e5)

    def test_theta_and_second_moment_match_schema(self):
        s = schema("moment_series.schema.json")
        r = run("--timing", "correlate-theta", "--theta", "1.4142135623730951", "--X", "1e4")
        self.assertEqual(r.returncode, 0, r.stderr)
        out = json.loads(r.stdout)
        jsonschema.validate(out, s)
        self.assertIsNone(out["limit"])
        self.assertIn("wall_seconds", out)
        r = run("correlate-theta", "--theta", "1.5", "--rational", "3/2", "--X", "1e4")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertIsNotNone(json.loads(r.stdout)["limit"])
        r = run("second-moment", "--f1", str(DATA / "parity.json"), "--f2", str(DATA / "three_periodic.json"),
                "--X", "1e4", "--grid", "log:10:1e4:2")
        self.assertEqual(r.returncode, 0, r.stderr)
        out = json.loads(r.stdout)
        jsonschema.validate(out, s)
        self.assertEqual(out["kind"], "second_moment")

    def test_certificate_matches_schema(self):
        r = run("--format", "json", "quadform", "check-pd", "--N", "36")
        self.assertEqual(r.returncode, 0, r.stderr)
        out = json.loads(r.stdout)
        jsonschema.validate(out, schema("pd_certificate.schema.json"))
        self.assertTrue(out["positive_definite"])
        self.assertEqual(out["index_set"], [1, 2, 3, 4, 6, 9, 12, 18, 36])

    def test_csv_output(self):
        r = run("--format", "csv", "correlate", "--a", "1", "--b", "1", "--X", "1000")
        self.assertEqual(r.returncode, 0, r.stderr)
        lines = r.stdout.splitlines()
        self.assertEqual(lines[0], "X,integral,normalized,limit,relative_error")
        self.assertEqual(len(lines), 4)
        r = run("--format", "text", "correlate", "--a", "1", "--b", "1", "--X", "1000")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertTrue(r.stdout.startswith("X "))
        self.assertEqual(len(r.stdout.splitlines()), 4)

    def test_mf_validate(self):
        r = run("mf", "validate", "--file", str(DATA / "parity.json"))
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertIn("valid, witness q=2", r.stdout)
        r = run("mf", "validate", "--file", str(DATA / "not_bounded.json"))
        self.assertEqual(r.returncode, 1)
        r = run("mf", "validate", "--file", str(DATA / "malformed.json"))
        self.assertEqual(r.returncode, 2)

    def test_usage_errors(self):
        self.assertEqual(run("correlate", "--a", "0", "--b", "1", "--X", "100").returncode, 2)
        self.assertEqual(run("correlate", "--a", "1", "--b", "1", "--X", "100", "--grid", "list:5,2").returncode, 2)
        self.assertEqual(run("no-such-command").returncode, 2)
        self.assertEqual(run("--format", "text", "limit", "--a", "1", "--b", "2").returncode, 2)
        self.assertEqual(run("correlate-theta", "--theta", "1.5", "--rational", "5/4", "--X", "100").returncode, 2)

    def test_repeated_runs_are_identical(self):
        args = ("--threads", "1", "correlate-theta", "--theta", "1.618033988749895", "--X", "2e5")
        first, second = run(*args), run(*args)
        self.assertEqual(first.returncode, 0, first.stderr)
        self.assertEqual(first.stdout, second.stdout)
        many = run("--threads", "4", *args[2:])
        self.assertEqual(first.stdout, many.stdout)

    def test_thread_variable(self):
        r = run("correlate", "--a", "2", "--b", "3", "--X", "2e5", env={"DIVCORR_THREADS": "3"})
        self.assertEqual(r.returncode, 0, r.stderr)
        base = run("--threads", "1", "correlate", "--a", "2", "--b", "3", "--X", "2e5")
        self.assertEqual(r.stdout, base.stdout)
        ignored = run("correlate", "--a", "2", "--b", "3", "--X", "2e5", env={"DIVCORR_THREADS": "zero"})
        self.assertEqual(ignored.returncode, 0, ignored.stderr)
        self.assertEqual(ignored.stdout, base.stdout)

    def test_out_file(self):
        path = Path(os.environ.get("TMPDIR", "/tmp")) / f"divcorr_cli_{os.getpid()}.json"
        try:
            r = run("--out", str(path), "limit", "--a", "2", "--b", "4")
            self.assertEqual(r.returncode, 0, r.stderr)
            self.assertEqual(r.stdout, "")
            self.assertIn("value", json.loads(path.read_text()))
        finally:
            path.unlink(missing_ok=True)

    def test_progress_on_stderr(self):
        r = subprocess.run([BINARY, "correlate", "--a", "1", "--b", "1", "--X", "1e4"], capture_output=True, text=True)
        self.assertIn("progress 100%", r.stderr)
        self.assertNotIn("progress", r.stdout)

    def test_prop_a(self):
        r = run("quadform", "prop-a", "--p", "2", "--K", "8")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertIn("<= 1e-12", r.stdout)


if __name__ == "__main__":
    unittest.main(argv=[sys.argv[0], "-v"])
