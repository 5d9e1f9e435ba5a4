import hashlib

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from polyseries import cli, fileio
from polyseries.ode import LinearODE
from polyseries.series import Series
from polyseries.singular import find_singular_points

SHIPPED_ODE_SHA256 = "3d1f5bdc6fd265fd196493d8ea78c94285c37e5b8736e86b1537885a9f9a262e"


def test_shipped_ode_checksum():
    data = fileio.data_path("appendix_a.ode").read_bytes()
    assert hashlib.sha256(data).hexdigest() == SHIPPED_ODE_SHA256


def test_shipped_ode_structure():
    ode = fileio.load_shipped_ode()
    assert ode.order == 8
    # P_8 = x^3 (1-4x)^4 (1+4x) (1+4x^2) (1+x+7x^2) Q_8 with deg Q_8 = 25
    assert ode.degree(8) == 3 + 4 + 1 + 2 + 2 + 25
    labels = [p.label() for p in find_singular_points(ode)]
    assert labels[:5] == ["x", "4*x + 1", "4*x - 1", "4*x**2 + 1", "7*x**2 + x + 1"]
    assert labels[-1] == "infinity"


def test_shipped_ode_render_is_byte_exact():
    path = fileio.data_path("appendix_a.ode")
    assert fileio.render_ode(fileio.read_ode(path)) == path.read_text()


def test_data_dir_override(tmp_path, monkeypatch):
    (tmp_path / "appendix_a.ode").write_text("order 1\nP 0 0 -1\nP 1 0 1\n")
    monkeypatch.setenv(fileio.DATA_ENV, str(tmp_path))
    assert fileio.load_shipped_ode() == LinearODE.from_lists([[-1], [1]])


@settings(max_examples=50)
@given(st.lists(st.integers(-10**40, 10**40), min_size=1, max_size=30), st.integers(0, 5),
       st.sampled_from([None, 1_000_003]))
def test_series_roundtrip_exact(vals, start, modulus):
    if modulus:
        vals = [v % modulus for v in vals]
    s = Series(vals, start, modulus, "t")
    text = fileio.render_series(s)
    back = fileio.parse_series(text)
    assert back == s and fileio.render_series(back) == text


def test_series_real_roundtrip(tmp_path):
    with mpmath.workdps(120):
        vals = [mpmath.mpf(1) / (n + 3) for n in range(5)]
    s = Series(vals, 0, None, "r", 120)
    fileio.write_series(tmp_path / "r.series", s)
    back = fileio.read_series(tmp_path / "r.series")
    with mpmath.workdps(120):
        assert all(abs(a - b) < mpmath.mpf(10) ** -118 for a, b in zip(back.coeffs, vals))


@settings(max_examples=50)
@given(st.lists(st.lists(st.integers(-10**30, 10**30), min_size=1, max_size=6), min_size=2, max_size=5))
def test_ode_roundtrip(polys):
    try:
        ode = LinearODE.from_lists(polys)
    except ValueError:
        return
    assert fileio.parse_ode(fileio.render_ode(ode)) == ode


@pytest.mark.parametrize("text", [
    "kind t\n0 1\n",
    "# polyseries series v1\nkind q\n0 1\n",
    "# polyseries series v1\nkind t\nmodulus 7\n0 9\n",
    "# polyseries series v1\nkind t\nmodulus exact\n0 1\n2 1\n",
])
def test_bad_series(text):
    with pytest.raises(fileio.FormatError):
        fileio.parse_series(text)


@pytest.mark.parametrize("text", ["P 0 0 1\n", "order 1\nP 0 1 1\n", "order 1\nP 0 0 1\nP 0 0 2\n"])
def test_bad_ode(text):
    with pytest.raises(fileio.FormatError):
        fileio.parse_ode(text)


# --- command line -----------------------------------------------------------------

def test_cli_enumerate_small(tmp_path, capsys):
    assert cli.main(["enumerate", "--max-n", "10", "--primes", "2", "--out", str(tmp_path)]) == 0
    t = fileio.read_series(tmp_path / "t.series")
    assert t.coeffs[2:7] == [4, 12, 42, 152, 562]
    out = capsys.readouterr().out
    assert out.count("peak states") == 2


def test_cli_enumerate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["enumerate", "--max-n", "30", "--primes", "3", "--out", str(a)])
    cli.main(["enumerate", "--max-n", "30", "--primes", "3", "--jobs", "2", "--out", str(b)])
    for kind in "cpt":
        assert (a / f"{kind}.series").read_bytes() == (b / f"{kind}.series").read_bytes()


def test_cli_enumerate_n1_warns(tmp_path, caplog):
    assert cli.main(["enumerate", "--max-n", "1", "--out", str(tmp_path)]) == 0
    assert "max-n=1" in caplog.text
    assert fileio.read_series(tmp_path / "t.series").coeffs == [0, 0]


def test_cli_verify_and_fit(tmp_path, capsys):
    cli.main(["enumerate", "--max-n", "40", "--primes", "4", "--out", str(tmp_path)])
    capsys.readouterr()
    ode_path = tmp_path / "c.ode"
    assert cli.main(["fit-ode", str(tmp_path / "c.series"), "--order", "1-2", "--degree", "0-3",
                     "--out", str(ode_path)]) == 0
    assert "found order 2" in capsys.readouterr().out
    assert cli.main(["verify-ode", str(ode_path), str(tmp_path / "c.series")]) == 0
    assert cli.main(["verify-ode", str(ode_path), str(tmp_path / "t.series")]) == 1
    assert cli.main(["fit-ode", str(tmp_path / "t.series"), "--order", "1-2", "--degree", "0-2"]) == 1


def test_cli_analyze_toy(tmp_path, capsys):
    path = tmp_path / "g.ode"
    fileio.write_ode(path, LinearODE.from_lists([[-1], [1, -1]]))
    assert cli.main(["analyze", str(path)]) == 0
    out = capsys.readouterr().out
    assert "point: x - 1" in out and "sum = 0, expected = 0" in out


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main(["analyze", str(tmp_path / "missing.ode")]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["fit-ode"])
    assert exc.value.code == 2
    assert cli.main(["enumerate", "--max-n", "0"]) == 2


def test_cli_amplitudes_zero_seed(tmp_path):
    fileio.write_series(tmp_path / "z.series", Series([0] * 80, kind="t"))
    assert cli.main(["amplitudes", str(tmp_path / "z.series")]) == 2


@pytest.fixture(scope="module")
def t_seed():
    # 5 primes lift p_n well past the 60-term seed window
    _, _, t = cli.run_enumeration(cli.PipelineConfig(max_n=60, primes=5), echo=lambda s: None)
    return [int(v) for v in t.coeffs]


def test_cli_amplitudes_smoke(tmp_path, capsys, t_seed):
    fileio.write_series(tmp_path / "seed.series", Series(t_seed, kind="t"))
    assert cli.main(["amplitudes", str(tmp_path / "seed.series"), "--terms", "1500",
                     "--K", "4", "--digits", "160"]) == 0
    out = capsys.readouterr().out
    assert "a0" in out and "absence tests" in out and "log n/n^1" in out


def test_cli_amplitudes_quick_mode_matches(t_seed):
    # K=10 on 4000 terms against K=30 on the same terms: shared amplitudes agree
    from polyseries import asympt
    cfg = cli.PipelineConfig(terms=4000, K=10, digits=220)
    quick = cli.run_amplitudes(fileio.load_shipped_ode(), t_seed, cfg, echo=lambda s: None)["model"]
    full = asympt.fit_amplitudes(asympt.normalize(_extend(t_seed, 4002), 460), 30)
    for name in ("a0", "b0", "c0"):
        assert asympt.agreement_digits(quick.amplitudes[name], full.amplitudes[name]) >= 20


def _extend(seed, n):
    from polyseries.holonomic import extend_series, ode_to_recurrence
    return extend_series(ode_to_recurrence(fileio.load_shipped_ode()), seed[:60], n)
