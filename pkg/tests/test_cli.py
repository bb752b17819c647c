import json
import socket
import subprocess
import sys
import time
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from conftest import DATA_DIR

K3 = DATA_DIR / "synthetic_k3.csv"


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "metamix", *args],
                          capture_output=True, text=True, cwd=cwd)


class TestAnalyzeCommand:
    def test_json_output_schema(self):
        res = run_cli("analyze", str(K3), "--methods", "bayes,dl")
        assert res.returncode == 0, res.stderr
        parsed = json.loads(res.stdout)
        assert list(parsed.keys()) == ["k", "config", "results", "tau"]
        assert parsed["k"] == 3
        assert [b["method"] for b in parsed["results"]] == ["bayes", "dl"]

    def test_text_output(self):
        res = run_cli("analyze", str(K3), "--format", "text")
        assert res.returncode == 0
        assert "k = 3" in res.stdout

    def test_full_flag_grammar(self, tmp_path):
        out = tmp_path / "fig1.svg"
        res = run_cli("analyze", str(K3),
                      "--tau-prior", "half-normal:0.5",
                      "--mu-prior", "uniform",
                      "--level", "0.95",
                      "--interval", "shortest",
                      "--methods", "bayes,dl",
                      "--subset", "last:3",
                      "--plot", str(out),
                      "--format", "json")
        assert res.returncode == 0, res.stderr
        assert out.exists()
        ET.fromstring(out.read_text())

    def test_subset_composition(self, tmp_path):
        k5 = DATA_DIR / "synthetic_k5.csv"
        truncated = tmp_path / "last3.csv"
        lines = k5.read_text().strip().splitlines()
        truncated.write_text("\n".join([lines[0]] + lines[-3:]) + "\n")
        via_flag = run_cli("analyze", str(k5), "--subset", "last:3", "--methods", "dl")
        direct = run_cli("analyze", str(truncated), "--methods", "dl")
        a, b = json.loads(via_flag.stdout), json.loads(direct.stdout)
        assert a["results"] == b["results"]
        assert a["tau"] == b["tau"]
        assert a["k"] == b["k"] == 3

    def test_determinism_byte_identical(self, tmp_path):
        svg1, svg2 = tmp_path / "a.svg", tmp_path / "b.svg"
        r1 = run_cli("analyze", str(K3), "--methods", "bayes,dl", "--plot", str(svg1))
        r2 = run_cli("analyze", str(K3), "--methods", "bayes,dl", "--plot", str(svg2))
        assert r1.returncode == r2.returncode == 0
        assert r1.stdout == r2.stdout
        assert svg1.read_bytes() == svg2.read_bytes()


class TestSensitivityCommand:
    def test_two_priors(self):
        res = run_cli("sensitivity", str(K3), "--tau-priors",
                      "half-normal:0.5,half-normal:1.0")
        assert res.returncode == 0, res.stderr
        reports = json.loads(res.stdout)
        assert [r["config"]["tau_prior"] for r in reports] == \
               ["half-normal:0.5", "half-normal:1.0"]

    def test_bad_spec_still_runs_others(self):
        res = run_cli("sensitivity", str(K3), "--tau-priors",
                      "half-normal:0.5,bogus:9")
        assert res.returncode == 1
        assert res.stderr.count("\n") == 1
        assert "bogus" in res.stderr
        reports = json.loads(res.stdout)
        assert len(reports) == 1


class TestExitCodes:
    def test_success_is_zero(self):
        assert run_cli("analyze", str(K3)).returncode == 0

    def test_usage_error_is_one(self):
        res = run_cli("analyze", str(K3), "--tau-prior", "gamma:1")
        assert res.returncode == 1
        assert res.stderr.startswith("meta: error: usage:")
        assert res.stderr.count("\n") == 1

    def test_unknown_flag_is_one(self):
        res = run_cli("analyze", str(K3), "--bogus")
        assert res.returncode == 1
        assert res.stderr.startswith("meta: error: usage:")

    def test_missing_file_is_two(self, tmp_path):
        res = run_cli("analyze", str(tmp_path / "missing.csv"))
        assert res.returncode == 2
        assert res.stderr.startswith("meta: error: data:")
        assert res.stderr.count("\n") == 1

    def test_bad_se_is_two(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("study,y,se\nA,0.5,0\n")
        res = run_cli("analyze", str(bad))
        assert res.returncode == 2
        assert "row 2" in res.stderr

    def test_too_few_studies_is_two(self, tmp_path):
        one = tmp_path / "one.csv"
        one.write_text("study,y,se\nA,0.5,0.2\n")
        res = run_cli("analyze", str(one), "--methods", "dl")
        assert res.returncode == 2
        assert "method dl" in res.stderr

    def test_bad_subset_is_one(self):
        res = run_cli("analyze", str(K3), "--subset", "first:2")
        assert res.returncode == 1

    def test_help_exits_zero(self):
        res = run_cli("--help")
        assert res.returncode == 0
        assert "analyze" in res.stdout


class TestRemoteMode:
    @pytest.fixture(scope="class")
    def server_url(self):
        import httpx

        sock = socket.socket()
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        sock.close()
        proc = subprocess.Popen(
            [sys.executable, "-m", "metamix", "serve", "--port", str(port)],
            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        url = f"http://127.0.0.1:{port}"
        try:
            for _ in range(60):
                try:
                    httpx.get(url + "/health", timeout=1.0)
                    break
                except Exception:
                    time.sleep(0.2)
            else:
                pytest.fail("service did not come up")
            yield url
        finally:
            proc.terminate()
            proc.wait()

    def test_remote_matches_local(self, server_url):
        remote = run_cli("analyze", str(K3), "--methods", "bayes,dl",
                         "--server", server_url)
        local = run_cli("analyze", str(K3), "--methods", "bayes,dl")
        assert remote.returncode == 0, remote.stderr
        a, b = json.loads(remote.stdout), json.loads(local.stdout)
        a["config"]["input"] = b["config"]["input"]  # remote has no local path
        assert a == b

    def test_remote_plot(self, server_url, tmp_path):
        out = tmp_path / "remote.svg"
        res = run_cli("analyze", str(K3), "--plot", str(out), "--server", server_url)
        assert res.returncode == 0, res.stderr
        ET.fromstring(out.read_text())

    def test_remote_data_error_maps_to_exit_two(self, server_url, tmp_path):
        one = tmp_path / "one.csv"
        one.write_text("study,y,se\nA,0.5,0.2\n")
        res = run_cli("analyze", str(one), "--methods", "dl", "--server", server_url)
        assert res.returncode == 2
        assert res.stderr.startswith("meta: error: data:")
