"""Command-line interface: subcommands, exit codes, determinism."""
import json
import subprocess
import sys

from ode3geom.cli import main

BOX_CHAZY = "x:-1:1,y:0.5:1.5,p:0.5:2,q:0.5:2"


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, out


class TestClassify:
    def test_contact_row(self, capsys):
        code, out = run_cli(["classify", "--group", "contact",
                             "--ode", "exp(q)", "--json"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["contact"]["row"] == "VI"
        assert payload["contact"]["dimension"] == 4

    def test_point_row(self, capsys):
        code, out = run_cli(["classify", "--group", "point",
                             "--ode", "q^2", "--json"], capsys)
        payload = json.loads(out)
        assert payload["point"]["row"] == "IV"
        assert payload["point"]["parameters"]["mu"]["value"] == "2"

    def test_parse_error_exit_code(self, capsys):
        code = main(["classify", "--ode", "q^"])
        assert code == 1

    def test_deterministic_json(self, capsys):
        _c1, out1 = run_cli(["classify", "--ode", "exp(q)", "--json",
                             "--seed", "42"], capsys)
        _c2, out2 = run_cli(["classify", "--ode", "exp(q)", "--json",
                             "--seed", "42"], capsys)
        assert out1 == out2


class TestInvariants:
    def test_invariants(self, capsys):
        code, out = run_cli(["invariants", "--ode", "exp(q)", "--json"],
                            capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["W_status"] == "nonzero"
        assert payload["B2"]["provenance"] == "symbolic"

    def test_stdin(self, capsys, monkeypatch):
        import io
        monkeypatch.setattr(sys, "stdin", io.StringIO("q^2"))
        code, out = run_cli(["invariants", "--ode", "-", "--json"], capsys)
        assert code == 0
        assert json.loads(out)["W_status"] == "nonzero"


class TestGeometry:
    def test_flat_weyl(self, capsys):
        code, out = run_cli(["geometry", "--ode", "3*q^2/p", "--json"],
                            capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["cotton_zero"] is True
        assert payload["weyl"]["phi"] == \
            {"dp": {"provenance": "symbolic", "value": "2*p^(-1)"}}

    def test_gate_exit_code(self, capsys):
        code, out = run_cli(["geometry", "--ode", "exp(q)", "--json"],
                            capsys)
        assert code == 2


class TestChazy:
    def test_class_ii(self, capsys):
        code, out = run_cli(["chazy", "--ode", "-2*y*q - 2*p^2",
                             "--box", BOX_CHAZY, "--json"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["matched"]["class"] == "II"
        assert payload["P"]["value"] == "2"
        assert payload["Q"]["value"] == "10/3*y"
        assert payload["tau"] == "5/12"

    def test_transform(self, capsys):
        code, out = run_cli(["chazy", "--ode", "-2*y*q - 2*p^2",
                             "--box", BOX_CHAZY, "--json", "--transform",
                             "--base", "0,1,0,0", "--c1", "1", "--c2", "0"],
                            capsys)
        payload = json.loads(out)
        samples = payload["transform"]["xbar_samples"]
        assert samples["0.000"]["provenance"] == "quadrature"


class TestPullback:
    def test_swap(self, capsys):
        code, out = run_cli(["pullback", "--ode", "0", "--chi", "y",
                             "--phi", "x"], capsys)
        assert code == 0
        assert out.strip() == "3*q^2*p^(-1)"


class TestBatchAndReport:
    def test_report(self, capsys):
        code, out = run_cli(["report", "--ode", "0", "--json"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["contact"]["row"] == "I"
        assert payload["point"]["row"] == "I.1"
        assert payload["geometry"]["cotton_zero"] is True
        assert payload["point_trivial"] is True

    def test_report_chazy_section_on_default_box(self, capsys):
        code, out = run_cli(["report", "--ode", "-2*y*q - 2*p^2", "--json"],
                            capsys)
        payload = json.loads(out)
        ch = payload["chazy"]
        assert ch["matched"]["class"] == "II"
        assert ch["P"]["value"] == "2"
        assert ch["Q"]["value"] == "10/3*y"

    def test_batch(self, tmp_path, capsys):
        batch = tmp_path / "odes.txt"
        batch.write_text("0\nexp(q)\n")
        code, out = run_cli(["report", "--batch", str(batch)], capsys)
        assert code == 0
        lines = [json.loads(line) for line in out.splitlines() if line]
        assert [l["input"] for l in lines] == ["0", "exp(q)"]
        assert lines[1]["contact"]["row"] == "VI"

    def test_config_file(self, tmp_path, capsys):
        cfgfile = tmp_path / "cfg"
        cfgfile.write_text("seed = 7\ntol = 1e-9\n"
                           f"box = {BOX_CHAZY}\n")
        code, out = run_cli(["chazy", "--ode", "-2*y*q - 2*p^2",
                             "--config", str(cfgfile), "--json"], capsys)
        assert code == 0
        assert json.loads(out)["matched"]["class"] == "II"

    def test_console_script(self):
        proc = subprocess.run(
            [sys.executable, "-m", "ode3geom.cli", "classify",
             "--ode", "0", "--json"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["contact"]["row"] == "I"
