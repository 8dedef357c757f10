"""End-to-end checks of the hlv executable.

Usage: cli_test.py PATH_TO_HLV TESTS_DIR
"""
import hashlib
import json
import math
import os
import subprocess
import sys
import tempfile
import unittest

HLV = None
TESTS = None


def run(*args, env=None, check_rc=None):
    full_env = dict(os.environ)
    full_env.pop("HLV_SEED", None)
    if env:
        full_env.update(env)
    p = subprocess.run([HLV, *args], capture_output=True, text=True, env=full_env)
    if check_rc is not None and p.returncode != check_rc:
        raise AssertionError(f"hlv {' '.join(args)} -> {p.returncode}, stderr: {p.stderr}")
    return p


def data(name):
    return os.path.join(TESTS, "data", name)


def close(a, b, rtol=1e-9, atol=1e-12, path="$"):
    if isinstance(a, dict):
        assert isinstance(b, dict) and set(a) == set(b), f"{path}: keys {sorted(a)} vs {sorted(b)}"
        for k in a:
            close(a[k], b[k], rtol, atol, f"{path}.{k}")
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), f"{path}: length mismatch"
        for i, (x, y) in enumerate(zip(a, b)):
            close(x, y, rtol, atol, f"{path}[{i}]")
    elif isinstance(a, float) or isinstance(b, float):
        assert isinstance(b, (int, float)) and not isinstance(b, bool), f"{path}: {a!r} vs {b!r}"
        assert math.isclose(a, b, rel_tol=rtol, abs_tol=atol), f"{path}: {a!r} vs {b!r}"
    else:
        assert a == b, f"{path}: {a!r} vs {b!r}"


def bisect(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


class ExitCodes(unittest.TestCase):
    def test_success(self):
        run("check", "-i", data("classical_pair.json"), check_rc=0)

    def test_version(self):
        p = run("--version", check_rc=0)
        self.assertIn("1.0.0", p.stdout)

    def test_unknown_flag(self):
        p = run("check", "-i", data("classical_pair.json"), "--bogus-flag", check_rc=1)
        self.assertTrue(p.stderr)

    def test_missing_file(self):
        run("check", "-i", os.path.join(TESTS, "data", "does_not_exist.json"), check_rc=1)

    def test_malformed_json(self):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            f.write("{\"a\": [1,")
        try:
            p = run("star", "classify", "-i", f.name, check_rc=1)
            self.assertIn("malformed", p.stderr)
        finally:
            os.unlink(f.name)

    def test_bad_field_named(self):
        p = run("star", "classify", "-i", data("unit_star.json"), "--E", "3", "-p", "frobnicate=1", check_rc=1)
        self.assertIn("frobnicate", p.stderr)
        p = run("star", "classify", "-i", data("unit_star.json"), "--E", "3", "-p", "a=\"x\"", check_rc=1)
        self.assertIn("a", p.stderr)

    def test_negative_result(self):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            json.dump({"a": [1.0], "b": [-1.0], "rbar": 1.0}, f)
        try:
            p = run("star", "persistence", "-i", f.name, check_rc=2)
            self.assertTrue(json.loads(p.stdout))
        finally:
            os.unlink(f.name)

    def test_bad_env_seed(self):
        run("ensemble", "census", "-p", "N_high=3", "--trials", "5", env={"HLV_SEED": "abc"}, check_rc=1)


class Manifest(unittest.TestCase):
    def test_hashes_and_sizes(self):
        with tempfile.TemporaryDirectory() as d:
            run("star", "profile", "-i", data("unit_star.json"), "-p", "points=11", "-o", d, check_rc=0)
            m = json.load(open(os.path.join(d, "manifest.json")))
            self.assertEqual(m["command"], "star.profile")
            self.assertEqual(m["config"]["points"], 11)
            self.assertEqual(m["versions"], {"cli": "1.0.0", "library": "1.0.0", "schema": 1})
            self.assertEqual(m["exit_status"], 0)
            self.assertIn("seed", m)
            names = sorted(o["name"] for o in m["outputs"])
            self.assertEqual(names, ["profile.csv", "report.json"])
            for o in m["outputs"]:
                raw = open(os.path.join(d, o["name"]), "rb").read()
                self.assertEqual(len(raw), o["bytes"])
                self.assertEqual(hashlib.sha256(raw).hexdigest(), o["sha256"])

    def test_formats(self):
        with tempfile.TemporaryDirectory() as d:
            run("star", "profile", "-i", data("unit_star.json"), "-p", "points=5", "--format", "json", "-o", d,
                check_rc=0)
            t = json.load(open(os.path.join(d, "profile.json")))
            self.assertEqual(t["columns"], ["q", "Phi"])
            self.assertEqual(len(t["rows"]), 5)
        with tempfile.TemporaryDirectory() as d:
            run("star", "profile", "-i", data("unit_star.json"), "-p", "points=5", "--format", "svg", "-o", d,
                check_rc=0)
            self.assertTrue(open(os.path.join(d, "profile.svg")).read().lstrip().startswith("<"))
            self.assertTrue(os.path.exists(os.path.join(d, "profile.csv")))

    def test_negative_manifest(self):
        with tempfile.TemporaryDirectory() as d:
            cfg = os.path.join(d, "cfg.json")
            json.dump({"a": [1.0], "b": [-1.0], "rbar": 1.0}, open(cfg, "w"))
            run("star", "persistence", "-i", cfg, "-o", os.path.join(d, "out"), check_rc=2)
            m = json.load(open(os.path.join(d, "out", "manifest.json")))
            self.assertEqual(m["exit_status"], 2)


class Seeds(unittest.TestCase):
    def census(self, d, *extra, env=None):
        run("ensemble", "census", "-p", "N_high=6", "--trials", "60", "-o", d, *extra, env=env, check_rc=0)
        m = json.load(open(os.path.join(d, "manifest.json")))
        return m, open(os.path.join(d, "report.json"), "rb").read()

    def test_env_and_flag_precedence(self):
        with tempfile.TemporaryDirectory() as d:
            m, _ = self.census(os.path.join(d, "a"), env={"HLV_SEED": "11"})
            self.assertEqual(m["seed"], 11)
            m, _ = self.census(os.path.join(d, "b"), "--seed", "5", env={"HLV_SEED": "11"})
            self.assertEqual(m["seed"], 5)
            m, _ = self.census(os.path.join(d, "c"))
            self.assertEqual(m["seed"], 1)

    def test_reproducible(self):
        with tempfile.TemporaryDirectory() as d:
            m1, r1 = self.census(os.path.join(d, "a"), "--seed", "3")
            m2, r2 = self.census(os.path.join(d, "b"), "--seed", "3")
            self.assertEqual([o["sha256"] for o in m1["outputs"]], [o["sha256"] for o in m2["outputs"]])
            m3, r3 = self.census(os.path.join(d, "c"), "--seed", "4")
            self.assertNotEqual(r1, r3)

    def test_workers_invariant(self):
        with tempfile.TemporaryDirectory() as d:
            _, r1 = self.census(os.path.join(d, "a"), "--seed", "9", "--workers", "1")
            _, r3 = self.census(os.path.join(d, "b"), "--seed", "9", "--workers", "3")
            self.assertEqual(r1, r3)


class Values(unittest.TestCase):
    def test_turning_points_oracle(self):
        p = run("star", "classify", "-i", data("unit_star.json"), "--E", "3", check_rc=0)
        rep = json.loads(p.stdout)
        self.assertEqual(rep["orbit"]["class"], "periodic")
        f = lambda q: math.exp(q) - q - 2.0
        self.assertAlmostEqual(rep["orbit"]["q_minus"], bisect(f, -10.0, 0.0), delta=1e-9)
        self.assertAlmostEqual(rep["orbit"]["q_plus"], bisect(f, 0.0, 10.0), delta=1e-9)

    def test_golden(self):
        cases = [
            ("check_classical_pair.json", ["check", "-i", data("classical_pair.json")]),
            ("star_classify_unit.json", ["star", "classify", "-i", data("unit_star.json"), "--E", "3"]),
        ]
        for golden, args in cases:
            with self.subTest(golden=golden):
                got = json.loads(run(*args, check_rc=0).stdout)
                want = json.load(open(os.path.join(TESTS, "golden", golden)))
                self.assertEqual(got["schema_version"], want["schema_version"])
                close(got, want, rtol=1e-7, atol=1e-10)


if __name__ == "__main__":
    HLV, TESTS = sys.argv[1], sys.argv[2]
    unittest.main(argv=[sys.argv[0], "-v"])
