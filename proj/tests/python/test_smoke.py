import json

import pytest

import uldyn


def test_field_arithmetic():
    Q5 = uldyn.Field("padic", 5, precision=12)
    x = Q5("3/25")
    assert x.valuation() == -2
    assert (x * Q5("25")).valuation() == 0
    five = Q5("5")
    assert (five * five.inv()).eq_at_precision(Q5("1"))
    assert (x - x).is_zero()

    F2 = uldyn.Field("laurent", 2, precision=8, uniformizer="t")
    a = F2("1 + t")
    assert (a + a).is_zero()
    assert (a * a.inv()).eq_at_precision(F2("1"))


def test_parse_errors():
    Q5 = uldyn.Field("padic", 5, precision=12)
    with pytest.raises(uldyn.ParseError):
        Q5("3//4")
    with pytest.raises(uldyn.DivisionByZero):
        Q5("0").inv()


def test_spectral_and_scale():
    Q5 = uldyn.Field("padic", 5, precision=24)
    A = uldyn.Matrix(Q5, [["5", "0", "0"], ["0", "1", "0"], ["0", "0", "1/5"]])
    assert A.scale() == (5, 1)
    dec = json.loads(A.decompose())
    assert [c["multiplicity"] for c in dec["components"]] == [1, 1, 1]
    slopes = [c["slope"] for c in dec["components"]]
    assert slopes == ["-1", "0", "1"]

    F2 = uldyn.Field("laurent", 2, precision=24, uniformizer="X")
    S = uldyn.Matrix(F2, [["X^-1", "0"], ["0", "X"]])
    assert S.scale() == (2, 1)


def test_analyze_roundtrip():
    request = {
        "field": {"kind": "padic", "p": 3, "precision": 20},
        "matrix": {"rows": 2, "cols": 2, "entries": [["3", "0"], ["0", "1/3"]]},
        "outputs": ["decompose", "scale"],
        "options": {"seed": 4},
    }
    code, report = uldyn.analyze(json.dumps(request))
    assert code == 0
    rep = json.loads(report)
    assert rep["scale"] == {"base": 3, "exponent": 1}
    assert rep["error"] is None


def test_selftest_determinism():
    code1, rep1 = uldyn.selftest(seed=11, sizes=[2], matrices=1, vectors=5, trials=2)
    code2, rep2 = uldyn.selftest(seed=11, sizes=[2], matrices=1, vectors=5, trials=2)
    assert code1 == code2 == 0
    assert rep1 == rep2
    _, rep3 = uldyn.selftest(seed=11, sizes=[2], matrices=1, vectors=5, trials=2, jobs=3)
    assert rep3 == rep1


def test_corpus():
    cases = [
        {"id": "E1.9", "p": 5, "precision": 12, "z": "1", "steps": 3,
         "expect": {"valuations": [0, 1, 2, 3]}},
        {"id": "E1.12", "q": 2, "truncation": 8},
    ]
    code, report = uldyn.corpus(json.dumps(cases))
    assert code == 0
    assert json.loads(report)["all_pass"] is True
