import math

import pytest

import qhlab


def test_version():
    assert qhlab.__version__ == "0.3.0"


def test_domains():
    sq = qhlab.unit_square()
    assert sq.contains((0.5, 0.5))
    assert not sq.contains((2.0, 0.0))
    assert sq.boundary_distance((0.5, 0.5)) == 0.5
    k = qhlab.disk_minus_fractal(1.0, 2)
    assert k.boundary_distance((0.0, 0.0)) == pytest.approx(math.sqrt(0.5))
    again = qhlab.read_domain(k.to_text())
    assert again.to_text() == k.to_text()


def test_whitney_census():
    w = qhlab.whitney_decompose(qhlab.unit_square(), 6)
    census = w.census()
    assert sum(census.values()) == len(w)
    level, x0, y0, x1, y1, dist = w.cube(0)
    assert x1 - x0 == 2.0 ** -level
    assert math.hypot(x1 - x0, y1 - y0) <= dist <= 4 * math.hypot(x1 - x0, y1 - y0)


def test_threshold_and_predicate():
    assert qhlab.threshold_p0(1.0, 1.5, 0.25) == pytest.approx(13 / 9)
    r = qhlab.poincare_predicate(1.0, 1.6, 1.5, 0.25)
    assert r["verdict"] == "Supported"
    r = qhlab.poincare_predicate(1.0, 1.05, 1.0, 0.1, c2bar=5.0)
    assert r["verdict"] == "CounterexampleRegime" and r["conditional"]
    assert qhlab.neumann_q_solvable(2, 0.5, 1.0)
    assert not qhlab.neumann_q_solvable(2, 0.5, 2.0)


def test_fits():
    assert 0.8 <= qhlab.qhbc_fit(qhlab.unit_square(), 8)["beta"] <= 1.2
    assert qhlab.fractal_box_count(1.0, 6, 4.0 ** -6) == 36864
    assert abs(qhlab.box_count_dimension(qhlab.l_shape()) - 1.0) < 0.05


def test_errors():
    with pytest.raises(ValueError, match=r"lambda must lie in \[1,2\)"):
        qhlab.disk_minus_fractal(2.5, 3)
    with pytest.raises(qhlab.PreconditionError):
        qhlab.run_pipeline({"jmax": "zero"}, "unused")


def test_pipeline(tmp_path):
    cfg = {"domain": "square", "jmax": 8, "iters": 10, "h": 1 / 16, "estimate": True}
    a = qhlab.run_pipeline(cfg, tmp_path / "a")
    b = qhlab.run_pipeline(cfg, tmp_path / "b")
    assert a == b
    assert 0.8 <= a["beta_fit"] <= 1.2
    assert (tmp_path / "a" / "census.csv").read_bytes() == (tmp_path / "b" / "census.csv").read_bytes()
