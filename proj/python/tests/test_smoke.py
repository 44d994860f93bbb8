import json
import os
import subprocess

import pytest

import ctlive

CLI = os.environ.get("CTLIVE_CLI")


def test_version_and_corpus():
    assert ctlive.version()
    names = ctlive.benchmarks()
    assert "fpu_mul" in names and "comb_loop" in names
    assert "assume(ct = 1)" in ctlive.bundled_file("fpu_mul.annot")


@pytest.mark.parametrize("name,annot,verdict", [
    ("fpu_mul", True, "Verified"),
    ("fpu_mul", False, "Violation"),
    ("rsa_modexp", False, "Violation"),
    ("a3", False, "Verified"),
    ("racy_multiwriter", False, "Racy"),
    ("comb_loop", False, "Ill-formed"),
])
def test_check_verdicts(name, annot, verdict):
    r = ctlive.check(f"bench:{name}", annot=f"bench:{name}.annot" if annot else None, timings=False)
    assert r["verdict"] == verdict
    assert r["exit_code"] == ctlive.EXIT_CODES[verdict]
    assert r["schema_version"] == 1
    assert "timings_ms" not in r


def test_witness_replays_through_simulate():
    r = ctlive.check("bench:rsa_modexp", timings=False)
    replay = ctlive.simulate("bench:rsa_modexp", schedule=r)
    assert replay["replay"]["diverges"]
    assert replay["verdict"] == "Violation"


def test_inline_source_and_emitters():
    src = """
module m(input clk, input s, output reg o);
  // source(s); sink(o);
  always @(posedge clk) o <= s;
endmodule
"""
    r = ctlive.check(("m.v", src))
    assert r["verdict"] == "Verified"
    assert r["invariant"]
    assert "live$o" in ctlive.emit_ir(("m.v", src), stage="instrumented")
    vc = ctlive.emit_vc(("m.v", src))
    assert vc.startswith("(set-logic HORN)") and vc == ctlive.emit_vc(("m.v", src))


def test_syntax_error_is_ill_formed():
    r = ctlive.check(("bad.v", "module m(; endmodule"))
    assert r["verdict"] == "Ill-formed"
    assert r["diagnostics"]


@pytest.mark.skipif(not CLI, reason="CLI path not provided")
def test_cli_exit_codes_and_json(tmp_path):
    out = tmp_path / "r.json"
    p = subprocess.run([CLI, "check", "bench:fpu_mul", "--annot", "bench:fpu_mul.annot", "--json", str(out)],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(out.read_text())["verdict"] == "Verified"
    assert subprocess.run([CLI, "check", "bench:mips_stall"], capture_output=True).returncode == 2
    assert subprocess.run([CLI, "races", "bench:racy_readwrite"], capture_output=True).returncode == 3
    assert subprocess.run([CLI, "check", str(tmp_path / "missing.v")], capture_output=True).returncode == 3
    p = subprocess.run([CLI, "emit-vc", "bench:fpu_mul"], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.startswith("(set-logic HORN)")
