"""Command-line interface: exit codes, report rendering, one-off tables."""

import textwrap

from mgtlab import cli

GN = """
    [experiment]
    kind = gn-check
    ns = 2, 3
    s_values = 0.5, 0.6

    [output]
    dir = gn
"""


def _cfg(tmp_path, body=GN, name="case.ini"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(body))
    return p


def test_run_exit_zero_on_pass(tmp_path, capsys):
    rc = cli.main(["run", str(_cfg(tmp_path)), "-o", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS" in out
    assert "[ok]" in out


def test_run_exit_one_on_gate_failure(tmp_path, capsys):
    body = """
        [params]
        tau = 0.1
        delta = 1.0

        [experiment]
        kind = roots
        n_xi = 16
        residual_tol = 1e-18
    """
    rc = cli.main(["run", str(_cfg(tmp_path, body, "strict.ini")),
                   "-o", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert rc == 1
    assert "FAIL" in out
    assert "[XX]" in out


def test_run_with_report_writes_figures(tmp_path, capsys):
    rc = cli.main(["run", str(_cfg(tmp_path)), "-o", str(tmp_path / "out"),
                   "--report"])
    assert rc == 0
    run_dir = tmp_path / "out" / "gn"
    assert (run_dir / "report.txt").is_file()
    assert (run_dir / "feasibility.svg").is_file()


def test_report_subcommand(tmp_path, capsys):
    cli.main(["run", str(_cfg(tmp_path)), "-o", str(tmp_path / "out")])
    capsys.readouterr()
    rc = cli.main(["report", str(tmp_path / "out" / "gn")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "status:  PASS" in out
    assert "checks:" in out


def test_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text("[experiment]\nkind = roots\nbanana = 1\n")
    rc = cli.main(["run", str(p)])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_roots_table(capsys):
    rc = cli.main(["roots", "--tau", "0.1", "--delta", "1.0",
                   "--xi", "0.5", "2.0"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "tau=0.1" in out
    assert out.count("\n") >= 4


def test_exponents_table(capsys):
    rc = cli.main(["exponents", "--n", "2", "--s", "3/5"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "part1 (m=2): feasible" in out
    assert "part2: feasible" in out
    rc = cli.main(["exponents", "--n", "4", "--s", "1/2"])
    out = capsys.readouterr().out
    assert "infeasible" in out


def test_schema_subcommand(capsys):
    rc = cli.main(["schema"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "kind = jmgt-run" in out
