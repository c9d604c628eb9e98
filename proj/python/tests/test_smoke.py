import math

import numpy as np
import pytest

import mball


def test_weights_and_mass():
    w = mball.Weight.parse("jacobi:mu=0.5")
    assert w == mball.Weight.jacobi(0.5)
    assert str(w) == "jacobi:mu=0.5"
    assert w.total_mass(2) == pytest.approx(math.pi, rel=1e-14)
    assert w([0.3, 0.4]) == pytest.approx(1.0)


def test_dist_chord_identity():
    x, y = [0.3, -0.2], [0.1, 0.7]
    assert mball.dist(x, x) == pytest.approx(0.0, abs=1e-15)
    assert mball.dist_tilde(x, y) == pytest.approx(2 * math.sin(mball.dist(x, y) / 2), rel=1e-13)


def test_basis_is_orthonormal_against_monte_carlo_free_rule():
    b = mball.orthonormal_basis(3, mball.Weight.jacobi(0.5), 2)
    assert len(b) == mball.dim_pi(3, 2) == 10
    assert b.gram_residual < 1e-10
    # Constant element is 1/sqrt(pi) for the unit weight.
    assert abs(b.eval([0.2, 0.1])[0]) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)


def test_worst_l2_hand_value_and_lifted_bound():
    w = mball.Weight.jacobi(0.5)
    assert mball.worst_l2(0, w).value == 0.0
    r = mball.worst_l2(1, w)
    assert r.value == pytest.approx(2.0, rel=1e-12)
    assert r.method == "eigen-exact"
    assert mball.lifted_lower_bound(6, 2.0, 0.5).value <= mball.worst_l2(6, w).value * (1 + 1e-10)


def test_trace_and_average():
    w = mball.Weight.jacobi(1.0)
    t = mball.trace_formula(4, w)
    assert t.max_relative_gap < 1e-8
    a = mball.average_monte_carlo(4, w, samples=500, seed=3)
    b = mball.average_monte_carlo(4, w, samples=500, seed=3, threads=4)
    assert a.mean == b.mean
    assert a.stderr > 0


def test_christoffel_degree_zero_is_mass():
    w = mball.Weight.jacobi(1.0)
    assert mball.christoffel_l2(0, w, [0.1, 0.2]) == pytest.approx(w.total_mass(2), rel=1e-12)
    assert mball.christoffel_lp(0, 1.5, w, [0.1, 0.2]) == pytest.approx(w.total_mass(2), rel=1e-12)


def test_gegenbauer_legendre():
    t = 0.3
    assert mball.gegenbauer(2, 0.5, t) == pytest.approx((3 * t * t - 1) / 2, rel=1e-14)
    assert mball.cutoff_eta(1.5) == pytest.approx(0.5)


def test_config_round_trip_and_run():
    c = mball.parse_config("experiment = worst\nweight = jacobi:mu=0.5\nn = 2..4\np = 2\n")
    assert mball.parse_config(mball.serialize_config(c)).n_values == [2, 3, 4]
    rec = mball.run(c)
    assert rec.passed
    assert len(rec.rows) == 3
    lines = rec.csv().strip().split("\n")
    assert lines[0].split(",")[-1] == "config_hash"
    assert all(line.split(",")[-1] == rec.hash == mball.config_hash(c) for line in lines[1:])
    values = np.array([float(row[rec.header.index("value")]) for row in rec.rows])
    assert np.all(np.diff(values) > 0)


def test_config_error_is_value_error():
    with pytest.raises(ValueError):
        mball.parse_config("colour = red\n")
