import json
from fractions import Fraction
from io import StringIO

from twistlab.cli import main, render


def run(*argv):
    out = StringIO()
    status = main(["--digits", "20", *argv], stdout=out)
    return status, out.getvalue()


def test_eval_phi():
    status, text = run("eval", "phi", "--s", "0", "--chi", "3:2", "--q", "0.5")
    assert status == 0
    report = json.loads(text)
    assert abs(float(report["value"]["re"]) - 2 / 7) < 1e-15
    assert report["config"]["command"] == "eval"
    assert report["config"]["precision_digits"] == 20


def test_eval_eisenstein_coefficients():
    status, text = run("eval", "eisenstein", "--m", "1", "--d2=-3", "--coeffs", "4")
    assert status == 0
    assert json.loads(text)["coefficients"] == ["1/6", "1", "0", "1", "1"]


def test_exact_l_value():
    status, text = run("lvalue", "--chi", "8:3", "--s=-2")
    assert status == 0
    report = json.loads(text)
    assert report["exact"] == "-3"
    assert report["chi"] == "8:3"


def test_input_errors_exit_with_two():
    assert run("lvalue", "--chi", "bogus", "--s", "1")[0] == 2
    assert run("eval", "phi", "--chi", "3:2")[0] == 2
    assert run("frobnicate")[0] == 2


def test_asymptotics_report():
    status, text = run("asymptotics", "--s1", "0", "--chi1", "3:2")
    assert status == 0
    report = json.loads(text)
    assert report["terminating"] is True


def test_csv_and_text_rendering():
    status, text = run("--format", "csv", "lvalue", "--chi", "D=-4", "--s", "0")
    assert status == 0
    header, row = text.strip().splitlines()
    assert "exact" in header.split(",")
    assert "1/2" in row.split(",")
    rendered = render({"value": {"re": "1", "im": "0"}, "exact": Fraction(1, 2)}, "text")
    assert rendered.splitlines() == ["value.re: 1", "value.im: 0", "exact: 1/2"]


def test_transseries_exit_status():
    status, text = run("transseries", "--s1", "1/2", "--chi1", "3:2", "--y", "0.25", "--side", "plus")
    assert status == 0
    report = json.loads(text)
    assert report["passed"] is True
    assert report["side"] == "plus"
