import pytest

from conezeta import rings
from conezeta.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def machine(text):
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v
    return out


@pytest.fixture
def heis_file(tmp_path):
    path = tmp_path / "heis.ring"
    path.write_text(rings.dumps(rings.heisenberg()))
    return str(path)


# -- local ------------------------------------------------------------------------------


def test_local_heisenberg(capsys):
    code, out = run(capsys, "local", "--builtin", "heisenberg", "--format", "machine")
    assert code == 0
    kv = machine(out)
    assert kv["status"] == "ok"
    assert kv["local_zeta"] == "(1 + p*t + p^2*t^2) / ((1 - t)*(1 - p^2*t^2)*(1 - p^3*t^2))"


def test_local_specialized(capsys):
    code, out = run(capsys, "local", "--builtin", "zd(3)", "--p", "2,3", "--format", "machine")
    assert code == 0
    kv = machine(out)
    assert kv["local_zeta_p2"] == "(1) / ((1 - t)*(1 - 2*t)*(1 - 4*t))"
    assert kv["exceptional_primes"] == "none"


def test_local_from_ring_file(capsys, heis_file):
    code, out = run(capsys, "local", "--ring", heis_file, "--format", "machine")
    assert code == 0
    assert "p^3*t^2" in machine(out)["local_zeta"]


def test_local_from_cone_file(capsys, tmp_path):
    path = tmp_path / "one.cone"
    path.write_text("m 1\nf0 1\ng0 0\n")
    code, out = run(capsys, "local", "--cone", str(path), "--format", "machine")
    assert code == 0
    assert machine(out)["status"] == "ok"


@pytest.mark.parametrize("cmd", ["local", "global"])
def test_non_monomial_exit(capsys, cmd):
    code, out = run(capsys, cmd, "--builtin", "sl2")
    assert code == 2
    assert "non-monomial" in out
    assert out.count("g[") == 3


def test_failing_ring_file(capsys, tmp_path):
    # [e1,e2]=e3 and [e2,e3]=e2 break the Jacobi identity
    path = tmp_path / "bad.ring"
    path.write_text("d 3 lie\n1 2 3 1\n2 1 3 -1\n2 3 2 1\n3 2 2 -1\n")
    code, out = run(capsys, "local", "--ring", str(path))
    assert code == 1
    assert "input-error" in out or "error" in out


@pytest.mark.parametrize("text", ["", "d x lie\n", "d 2 lie\n1 2\n", "d 2 lie\n1 5 1 1\n"])
def test_unparsable_ring_file(capsys, tmp_path, text):
    path = tmp_path / "bad.ring"
    path.write_text(text)
    code, _ = run(capsys, "local", "--ring", str(path))
    assert code == 1


def test_unknown_builtin(capsys):
    code, _ = run(capsys, "local", "--builtin", "nosuch")
    assert code == 1


def test_bad_cone_file(capsys, tmp_path):
    path = tmp_path / "bad.cone"
    path.write_text("m 2\nf0 1\n")
    code, _ = run(capsys, "local", "--cone", str(path))
    assert code == 1


# -- global -----------------------------------------------------------------------------


def test_global_zd4(capsys):
    code, out = run(capsys, "global", "--builtin", "zd(4)", "--format", "machine")
    kv = machine(out)
    assert code == 0
    assert (kv["abscissa"], kv["pole_order"]) == ("4", "1")
    assert kv["verdict"] == "terminated"


def test_global_heisenberg(capsys):
    code, out = run(capsys, "global", "--builtin", "heisenberg", "--format", "machine")
    kv = machine(out)
    assert code == 0
    assert (kv["abscissa"], kv["pole_order"], kv["b"]) == ("2", "2", "1")
    assert kv["factors"] == "zeta(s)*zeta(s - 1)*zeta(2*s - 2)*zeta(2*s - 3)*zeta(3*s - 3)^-1"


def test_global_fixtures(capsys):
    code, out = run(capsys, "global", "--fixture", "sl2", "--format", "machine")
    assert code == 0
    assert (machine(out)["abscissa"], machine(out)["pole_order"]) == ("2", "1")
    code, out = run(capsys, "global", "--fixture", "dinf", "--N", "2000", "--format", "machine")
    kv = machine(out)
    assert code == 0
    assert kv["abscissa"] == "2"
    assert kv["euler_product"] == "no"


# -- oracle commands --------------------------------------------------------------------


def test_count(capsys):
    code, out = run(capsys, "count", "--builtin", "sl2", "--p", "3", "--n", "2")
    assert code == 0
    assert out.split() == ["1", "4", "25"]


def test_count_budget(capsys):
    code, out = run(capsys, "count", "--builtin", "sl2", "--p", "3", "--n", "3", "--budget", "10")
    assert code == 4
    assert "budget-exceeded" in out


@pytest.mark.parametrize("name,primes", [("heisenberg", "2,3,5"), ("zd(3)", "2,3")])
def test_verify_passes(capsys, name, primes):
    code, out = run(capsys, "verify", "--builtin", name, "--primes", primes, "--n-max", "4",
                    "--format", "machine")
    kv = machine(out)
    assert code == 0
    assert kv["status"] == "pass"
    assert kv["a[2^1]"].startswith("pass")
    rows = [k for k in kv if k.startswith("a[")]
    assert len(rows) == 5 * len(primes.split(","))


def test_verify_ideal(capsys):
    code, out = run(capsys, "verify", "--builtin", "heisenberg", "--kind", "ideal",
                    "--primes", "2", "--n-max", "3", "--format", "machine")
    assert code == 0
    assert machine(out)["a[2^2]"] == "pass cone 7 oracle 7"


def test_verify_mismatch(capsys, monkeypatch):
    # pair the Heisenberg oracle with the abelian cone
    from conezeta import cli, conditions
    abelian = conditions.ring_cone_data(rings.zd(3), "subring")
    monkeypatch.setattr(cli.conditions, "ring_cone_data", lambda sc, kind: abelian)
    code, out = run(capsys, "verify", "--builtin", "heisenberg", "--primes", "2", "--n-max", "2",
                    "--format", "machine")
    kv = machine(out)
    assert code == 3
    assert kv["status"] == "mismatch"
    assert kv["a[2^2]"] == "MISMATCH cone 35 oracle 19"


# -- asymptotics and conditions ---------------------------------------------------------


def test_asymptotics(capsys, tmp_path):
    dump = tmp_path / "a.txt"
    code, out = run(capsys, "asymptotics", "--builtin", "zd(2)", "--N", "1000",
                    "--dump", str(dump), "--format", "machine")
    kv = machine(out)
    assert code == 0
    assert kv["abscissa"] == "2" and kv["N"] == "1000"
    assert kv["row_10"].split(",")[0] == "87"
    lines = dump.read_text().splitlines()
    assert lines[:3] == ["1 1", "2 3", "3 4"]
    assert len(lines) == 1000


def test_conditions(capsys):
    code, out = run(capsys, "conditions", "--builtin", "heisenberg", "--kind", "ideal")
    assert code == 0
    assert "F_ideal" in out
    assert "m33" in out


# -- output contract --------------------------------------------------------------------


@pytest.mark.parametrize("argv", [
    ["local", "--builtin", "heisenberg"],
    ["global", "--builtin", "heisenberg", "--format", "machine"],
    ["conditions", "--builtin", "sl2"],
])
def test_deterministic(capsys, argv):
    _, first = run(capsys, *argv)
    _, second = run(capsys, *argv)
    assert first == second


def test_machine_lines_are_key_value(capsys):
    _, out = run(capsys, "global", "--builtin", "zd(2)", "--format", "machine")
    for line in out.splitlines():
        key, _, value = line.partition("=")
        assert key and " " not in key and value


@pytest.mark.parametrize("argv", [
    ["local", "--builtin", "heisenberg", "--cone", "x.cone"],
    ["count", "--builtin", "sl2"],
    ["nosuch"],
])
def test_usage_errors_exit_one(capsys, argv):
    code, _ = run(capsys, *argv)
    assert code == 1


def test_help_exits_zero(capsys):
    code, out = run(capsys, "--help")
    assert code == 0
    assert "verify" in out
