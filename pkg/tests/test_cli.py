import json
from fractions import Fraction as F

import pytest

import heterobaker as hb
from heterobaker.cli import main
from heterobaker.pcfun import pcfun1d_to_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_orbit_csv(capsys):
    code, out = run(capsys, "orbit", "--point", "1/10,3/10,1/2", "--n", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,xu,xc,xs"
    assert lines[2].startswith("1,2/5,3/20,1/4")
    assert lines[-1].startswith("# config=")


def test_ruin_transition_value(capsys):
    code, out = run(capsys, "ruin-transition", "--l", "2", "--lp", "2",
                    "--n", "4")
    assert code == 0
    row = out.strip().splitlines()[1].split(",")
    assert float(row[3]) == 0.3125


def test_ruin_csv(capsys):
    code, out = run(capsys, "ruin", "--delta", "1", "--n", "2")
    assert code == 0
    rows = [r for r in out.strip().splitlines()[1:] if not r.startswith("#")]
    assert rows[0] == "0,1,1"
    assert "2,1,1/4" in rows and "2,3,1/4" in rows


def test_corr_squarewave(capsys):
    code, out = run(capsys, "corr", "--phi", "xc-1/2", "--psi", "xc-1/2",
                    "--method", "squarewave", "--numeric", "rational",
                    "--n-max", "2")
    assert code == 0
    rows = [r.split(",") for r in out.strip().splitlines()[1:]
            if not r.startswith("#")]
    assert float(rows[1][1]) == pytest.approx(1 / 24)
    assert float(rows[2][1]) == pytest.approx(7 / 192)


def test_apply_op(tmp_path, capsys):
    f = tmp_path / "chi.json"
    f.write_text(pcfun1d_to_json(hb.wavelet(1, 0)))
    code, out = run(capsys, "apply-op", "--op", "p0", "--n", "2",
                    "--in", str(f))
    assert code == 0
    g = hb.pcfun.pcfun1d_from_json(out)
    assert hb.inner_product(g, hb.wavelet(1, 0)) == F(1, 4)


def test_slope_json(tmp_path, capsys):
    csv = tmp_path / "series.csv"
    lines = ["n,value,method,err"]
    lines += [f"{n},{2.0 * n ** -1.5},synthetic,0" for n in range(1, 128)]
    csv.write_text("\n".join(lines) + "\n")
    code, out = run(capsys, "slope", "--in", str(csv), "--window", "8:127")
    assert code == 0
    fit = json.loads(out)
    assert fit["slope"] == pytest.approx(-1.5, abs=1e-9)


def test_verify_identities(capsys):
    code, out = run(capsys, "verify-identities")
    assert code == 0
    assert json.loads(out)["passed"]


def test_verify_all(capsys):
    code, out = run(capsys, "verify-all")
    assert code == 0
    report = json.loads(out)
    assert report["passed"] and all(report["checks"].values())


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["corr", "--phi", "xc-1/2"])  # missing --psi
    assert exc.value.code == 2


def test_mc_requires_seed(capsys):
    code, _ = run(capsys, "corr", "--phi", "xc-1/2", "--psi", "xc-1/2",
                  "--method", "mc", "--n-list", "1", "--samples", "10000")
    assert code == 2


def test_determinism(capsys):
    args = ("corr", "--phi", "xc-1/2", "--psi", "xc-1/2", "--method", "mc",
            "--n-list", "0,1", "--samples", "20000", "--seed", "11")
    _, out1 = run(capsys, *args)
    _, out2 = run(capsys, *args, "--workers", "2")
    assert out1.replace("--workers", "") .splitlines()[1:3] == \
        out2.splitlines()[1:3]
