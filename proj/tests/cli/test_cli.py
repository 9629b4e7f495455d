"""End-to-end checks of the kinetica command-line tool.

Usage: test_cli.py <kinetica binary> <source dir>
"""

import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

BINARY = None
SOURCE = None

SCHEMA_FOR = {
    "report.json": "validate.schema.json",
    "analysis.json": "analysis.schema.json",
    "fixed_points.json": "fixed_points.schema.json",
    "fluctuations.json": "fluctuations.schema.json",
    "convergence.json": "convergence.schema.json",
    "manifest.json": "manifest.schema.json",
}


def network(name):
    return str(SOURCE / "examples_networks" / name)


class CliTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def run_cli(self, *args, env=None):
        full_env = dict(os.environ)
        full_env.pop("KINETICA_SEED", None)
        if env:
            full_env.update(env)
        return subprocess.run([str(BINARY), *args], capture_output=True, text=True, env=full_env, timeout=300)

    def out(self, name):
        return str(self.tmp / name)

    def assert_schema_valid(self, directory):
        found = 0
        for path in Path(directory).rglob("*.json"):
            schema = json.loads((SOURCE / "schemas" / SCHEMA_FOR[path.name]).read_text())
            jsonschema.validate(json.loads(path.read_text()), schema)
            found += 1
        self.assertGreater(found, 0, f"no JSON artifacts in {directory}")

    def read_tree(self, directory):
        return {p.relative_to(directory): p.read_bytes() for p in sorted(Path(directory).rglob("*")) if p.is_file()}

    # -------------------------------------------------------------- exit codes

    def test_validate_every_example(self):
        for net in sorted((SOURCE / "examples_networks").glob("*.net")):
            with self.subTest(net=net.name):
                out = self.out("v_" + net.stem)
                r = self.run_cli("validate", "--network", str(net), "--out", out)
                self.assertEqual(r.returncode, 0, r.stderr)
                self.assert_schema_valid(out)

    def test_validate_reports_schloegl_case(self):
        out = self.out("v")
        r = self.run_cli("validate", "--network", network("schloegl_balanced.net"), "--out", out)
        self.assertEqual(r.returncode, 0, r.stderr)
        report = json.loads((Path(out) / "report.json").read_text())
        self.assertEqual(report["schloegl"]["case"], "balanced_ratio")
        self.assertAlmostEqual(report["schloegl"]["b"], 0.5)

    def test_analyze_reversible_network_exits_zero(self):
        out = self.out("a")
        r = self.run_cli("analyze", "--network", network("isomerization.net"), "--out", out, "--seed", "1",
                         "--box", "0:5,0:5")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assert_schema_valid(out)
        report = json.loads((Path(out) / "analysis.json").read_text())
        self.assertEqual(report["detailed_balance"]["status"], "holds")
        self.assertEqual(report["detailed_balance"]["witness"]["b"], [2.0, 1.0])
        self.assertEqual(report["kolmogorov"]["status"], "holds")

    def test_analyze_irreversible_network_exits_two(self):
        path = self.tmp / "oneway.net"
        path.write_text("A -> B @ 1\n")
        r = self.run_cli("analyze", "--network", str(path), "--out", self.out("a"), "--seed", "1")
        self.assertEqual(r.returncode, 2, r.stderr)

    def test_analyze_unitary_cycle_is_a_violation(self):
        out = self.out("a")
        r = self.run_cli("analyze", "--network", network("cycle3.net"), "--out", out, "--seed", "1",
                         "--box", "0:3,0:3,0:3")
        self.assertEqual(r.returncode, 2, r.stderr)
        self.assert_schema_valid(out)
        report = json.loads((Path(out) / "analysis.json").read_text())
        self.assertEqual(report["unitarity"]["status"], "holds")
        self.assertEqual(report["detailed_balance"]["status"], "fails")
        self.assertEqual(report["kolmogorov"]["status"], "fails")

    def test_analyze_with_clamp(self):
        out = self.out("a")
        r = self.run_cli("analyze", "--network", network("dimerization.net"), "--out", out, "--seed", "1",
                         "--clamp", "M=1")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assert_schema_valid(out)
        report = json.loads((Path(out) / "analysis.json").read_text())
        self.assertIn(report["clamped"]["verdict"], ["reversible", "generically_irreversible"])

    def test_usage_errors_exit_one(self):
        cases = [
            [],
            ["bogus-verb"],
            ["validate"],
            ["validate", "--network", network("decay.net"), "--nonsense"],
            ["simulate", "--network", network("decay.net"), "--seed", "abc", "--c0", "1,0"],
            ["simulate", "--network", network("decay.net"), "--seed", "1"],
            ["simulate", "--network", network("decay.net"), "--seed", "1", "--c0", "1,0", "--poisson", "1,1"],
            ["simulate", "--network", network("decay.net"), "--seed", "1", "--c0", "1,x"],
            ["convergence", "--network", network("decay.net"), "--seed", "1", "--mode", "sideways"],
        ]
        for args in cases:
            with self.subTest(args=args):
                r = self.run_cli(*args, *(["--out", self.out("u")] if len(args) > 1 else []))
                self.assertEqual(r.returncode, 1, r.stderr)

    def test_malformed_network_is_a_usage_error(self):
        path = self.tmp / "bad.net"
        path.write_text("A => B\n")
        r = self.run_cli("validate", "--network", str(path), "--out", self.out("v"))
        self.assertEqual(r.returncode, 1)
        self.assertIn("line 1, column 3", r.stderr)

    def test_truncated_replicas_exit_three(self):
        out = self.out("s")
        r = self.run_cli("simulate", "--network", network("isomerization.net"), "--out", out, "--seed", "4",
                         "--c0", "1,1", "--max-events", "3")
        self.assertEqual(r.returncode, 3, r.stderr)
        manifest = json.loads((Path(out) / "manifest.json").read_text())
        self.assertEqual(manifest["replicas"][0]["status"], "max_events")

    # ----------------------------------------------------------- reproducibility

    def test_simulate_reruns_are_identical(self):
        args = ["simulate", "--network", network("schloegl_bistable.net"), "--seed", "77", "--M", "50",
                "--c0", "1", "--replicas", "4", "--samples", "11"]
        a, b, c = self.out("s1"), self.out("s2"), self.out("s3")
        for out, workers in ((a, "1"), (b, "3"), (c, "1")):
            r = self.run_cli(*args, "--out", out, "--workers", workers)
            self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual(self.read_tree(a), self.read_tree(b))
        self.assertEqual(self.read_tree(a), self.read_tree(c))
        self.assert_schema_valid(a)

    def test_seed_from_environment_matches_flag(self):
        args = ["simulate", "--network", network("isomerization.net"), "--M", "20", "--c0", "1,1", "--samples", "6"]
        flag, env = self.out("flag"), self.out("env")
        self.assertEqual(self.run_cli(*args, "--out", flag, "--seed", "9").returncode, 0)
        self.assertEqual(self.run_cli(*args, "--out", env, env={"KINETICA_SEED": "9"}).returncode, 0)
        self.assertEqual((Path(flag) / "replica_0000.csv").read_bytes(), (Path(env) / "replica_0000.csv").read_bytes())
        self.assertEqual(json.loads((Path(env) / "manifest.json").read_text())["seed_source"], "environment")

    def test_config_overlay_supplies_options(self):
        config = self.tmp / "config.json"
        config.write_text(json.dumps({"M": 20, "c0": [1, 1], "samples": 6, "seed": "9"}))
        direct, overlay = self.out("direct"), self.out("overlay")
        r = self.run_cli("simulate", "--network", network("isomerization.net"), "--out", direct, "--seed", "9",
                         "--M", "20", "--c0", "1,1", "--samples", "6")
        self.assertEqual(r.returncode, 0, r.stderr)
        r = self.run_cli("simulate", "--network", network("isomerization.net"), "--out", overlay,
                         "--config", str(config))
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual(self.read_tree(direct), self.read_tree(overlay))

    def test_unknown_config_key_is_a_usage_error(self):
        config = self.tmp / "config.json"
        config.write_text(json.dumps({"colour": "blue"}))
        r = self.run_cli("simulate", "--network", network("isomerization.net"), "--out", self.out("s"),
                         "--config", str(config))
        self.assertEqual(r.returncode, 1)

    # ------------------------------------------------------------------ analyses

    def test_fixed_points_of_bistable_schloegl(self):
        out = self.out("f")
        r = self.run_cli("fixed-points", "--network", network("schloegl_bistable.net"), "--out", out)
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assert_schema_valid(out)
        points = json.loads((Path(out) / "fixed_points.json").read_text())["points"]
        found = sorted((p["c"][0], p["stability"]) for p in points)
        expected = [(0.26371215743114201, "stable"), (1.0190084449232961, "unstable"), (10.717279397645562, "stable")]
        self.assertEqual(len(found), 3)
        for (c, s), (c_ref, s_ref) in zip(found, expected):
            self.assertAlmostEqual(c, c_ref, delta=1e-9 * c_ref)
            self.assertEqual(s, s_ref)

    def test_fluctuations_report(self):
        out = self.out("fl")
        r = self.run_cli("fluctuations", "--network", network("isomerization.net"), "--out", out, "--seed", "2",
                         "--empirical", "--M", "200", "--replicas", "64", "--lag-count", "4")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assert_schema_valid(out)
        report = json.loads((Path(out) / "fluctuations.json").read_text())
        self.assertEqual(report["linearization"]["fixed_point"], [2.0, 1.0])
        self.assertTrue(report["onsager"]["symmetric"])
        self.assertFalse(report["kubo"]["sign_discrepancy"])
        self.assertLess(report["kubo"]["residual"], 1e-8)
        for name in ("lambda.csv", "gamma.csv", "ou_covariance.csv", "empirical_covariance.csv"):
            self.assertTrue((Path(out) / name).is_file(), name)

    def test_fluctuations_at_unstable_point_reports_no_kubo(self):
        out = self.out("fl")
        r = self.run_cli("fluctuations", "--network", network("schloegl_bistable.net"), "--out", out, "--seed", "2",
                         "--c-bar", "1.0190084449232961")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assert_schema_valid(out)
        report = json.loads((Path(out) / "fluctuations.json").read_text())
        self.assertIsNone(report["kubo"])
        self.assertIn("kubo_note", report)

    def test_lattice_and_scaling_convergence(self):
        out = self.out("l")
        r = self.run_cli("lattice", "--network", network("isomerization.net"), "--out", out, "--seed", "3",
                         "--extent", "10", "--jumps", "A=1,0.5;B=1,0.5", "--profile", "A=const:1;B=const:2",
                         "--taus", "0,0.1")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assert_schema_valid(out)
        header = (Path(out) / "field.csv").read_text().splitlines()[0]
        self.assertEqual(header, "tau,X,species,value")

        out = self.out("c")
        r = self.run_cli("convergence", "--network", network("isomerization.net"), "--out", out, "--seed", "3",
                         "--mode", "scaling", "--extent", "10", "--jumps", "A=1,0;B=1,0",
                         "--profile", "A=sin:1:0.5:1;B=const:1", "--taus", "0.5", "--epsilon-list", "0.1,0.05",
                         "--replicas", "4", "--control")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assert_schema_valid(out)

    def test_meanfield_convergence(self):
        out = self.out("c")
        r = self.run_cli("convergence", "--network", network("schloegl_closed.net"), "--out", out, "--seed", "3",
                         "--c0", "0.5", "--M-list", "100,1000", "--replicas", "8")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assert_schema_valid(out)
        table = json.loads((Path(out) / "convergence.json").read_text())
        self.assertEqual([row["M"] for row in table["rows"]], [100.0, 1000.0])

    def test_lattice_without_drift_under_euler_scaling_is_rejected(self):
        r = self.run_cli("lattice", "--network", network("isomerization.net"), "--out", self.out("l"), "--seed", "3",
                         "--extent", "10", "--jumps", "A=1,1;B=1,1", "--profile", "A=const:1;B=const:2")
        self.assertEqual(r.returncode, 1, r.stderr)


def main():
    global BINARY, SOURCE
    if len(sys.argv) < 3:
        print(__doc__, file=sys.stderr)
        return 1
    BINARY = Path(sys.argv[1]).resolve()
    SOURCE = Path(sys.argv[2]).resolve()
    suite = unittest.defaultTestLoader.loadTestsFromTestCase(CliTest)
    result = unittest.TextTestRunner(verbosity=2).run(suite)
    return 0 if result.wasSuccessful() else 1


if __name__ == "__main__":
    sys.exit(main())
