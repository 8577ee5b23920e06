import io

import numpy as np
import pytest

from heavytail.rv import Rademacher, RegVarDist
from heavytail.simulate import (
    Path,
    PathConfig,
    _innovation_block,
    read_path_csv,
    simulate_ar1,
    simulate_linear,
    simulate_sequence_space,
    write_path_csv,
)
from heavytail.spaces import DomainError, ScalarOp, max_norm
from heavytail.spectral import family_from_coeffs

R1 = max_norm(1)
POS1 = RegVarDist(1.0, 1.0, Rademacher(1.0))


def test_identity_family_reproduces_innovations():
    fam = family_from_coeffs([1.0], 1.0, R1)
    cfg = PathConfig(1000, 0, 0, seed=5)
    path = simulate_linear(fam, POS1, cfg)
    z = _innovation_block(POS1, 1000, 5)
    np.testing.assert_array_equal(path.values, z)


def test_ma2_is_sum_of_adjacent_innovations():
    fam = family_from_coeffs([1.0, 1.0], 1.0, R1)
    cfg = PathConfig(500, 1, 1, seed=6)
    path = simulate_linear(fam, POS1, cfg)
    z = _innovation_block(POS1, 501, 6)  # indices 0..L, time j = t - 1 + ... offset
    manual = z[1:] + z[:-1]
    np.testing.assert_allclose(path.values, manual)


def test_linear_path_determinism():
    fam = family_from_coeffs([1.0, 0.5], 1.5, R1)
    cfg = PathConfig(2000, 1, 1, seed=7)
    a = simulate_linear(fam, RegVarDist(1.5, 1.0, Rademacher(0.4)), cfg)
    b = simulate_linear(fam, RegVarDist(1.5, 1.0, Rademacher(0.4)), cfg)
    assert np.array_equal(a.values, b.values)


def test_linear_validates_window_sizes():
    fam = family_from_coeffs([1.0, 1.0, 1.0], 1.0, R1)
    with pytest.raises(DomainError):
        simulate_linear(fam, POS1, PathConfig(100, 2, 1, seed=1))
    with pytest.raises(DomainError):
        simulate_linear(fam, POS1, PathConfig(100, 1, 2, seed=1))


def test_linear_tail_ratio_matches_series_constant():
    # oracle: Pr(||X|| > x) / V(x) -> sum c_n = 2 for coefficients (1, 1);
    # finite-x correction for Pareto(1) sums is +2 ln(x-1)/x relative to 2/x
    fam = family_from_coeffs([1.0, 1.0], 1.0, R1)
    cfg = PathConfig(2_000_000, 1, 1, seed=8)
    path = simulate_linear(fam, POS1, cfg)
    x = 10_000.0  # 99.99% innovation quantile at alpha=1
    ratio = (path.norms() > x).mean() / POS1.tail_prob(x)
    assert abs(ratio - 2.0) < 0.2


def test_stationarity_halves_agree():
    fam = family_from_coeffs([1.0, 0.8, 0.6], 1.0, R1)
    path = simulate_linear(fam, POS1, PathConfig(400_000, 2, 2, seed=9))
    clipped = np.minimum(path.norms(), 50.0)
    a, b = clipped[:200_000], clipped[200_000:]
    se = np.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
    assert abs(a.mean() - b.mean()) < 3 * se


def test_ar1_zero_operator_is_iid():
    cfg = PathConfig(1000, 0, 0, seed=10)
    path = simulate_ar1(ScalarOp(0.0, 1), POS1, cfg)
    z = _innovation_block(POS1, 1000, 10)
    np.testing.assert_allclose(path.values, z)


def test_ar1_degenerate_innovations_converge_to_fixed_point():
    # near-deterministic innovations (huge alpha): X_t -> 1 / (1 - 0.5) = 2
    degenerate = RegVarDist(1e12, 1.0, Rademacher(1.0))
    path = simulate_ar1(ScalarOp(0.5, 1), degenerate, PathConfig(200, 100, 0, seed=11))
    np.testing.assert_allclose(path.values[-50:], 2.0, atol=1e-6)


def test_ar1_requires_contraction():
    with pytest.raises(DomainError):
        simulate_ar1(ScalarOp(1.01, 1), POS1, PathConfig(100, 10, 0, seed=12))


def test_ar1_tail_ratio():
    # oracle: sum_n c^(n*alpha) = 1 / (1 - 0.5) = 2 at alpha=1
    path = simulate_ar1(ScalarOp(0.5, 1), POS1, PathConfig(2_000_000, 64, 64, seed=13))
    x = 10_000.0
    ratio = (path.norms() > x).mean() / POS1.tail_prob(x)
    assert abs(ratio - 2.0) < 0.2


def test_ar1_matches_linear_representation():
    # same innovation stream (burn_in == truncation): recursion equals the
    # truncated moving-average sum up to the geometric tail bound
    M = 40
    coeffs = [0.5**n for n in range(M + 1)]
    fam = family_from_coeffs(coeffs, 1.0, R1)
    cfg = PathConfig(5000, M, M, seed=14)
    lin = simulate_linear(fam, POS1, cfg)
    rec = simulate_ar1(ScalarOp(0.5, 1), POS1, cfg)
    z = _innovation_block(POS1, 5000 + M, 14)
    bound = rec.meta["truncation_error_bound"] * np.abs(z).max()
    assert np.max(np.abs(lin.values - rec.values)) <= bound + 1e-12


def test_sequence_space_shape_and_shift():
    weights = [0.9**n for n in range(6)]
    cfg = PathConfig(300, 5, 5, seed=15)
    path = simulate_sequence_space(weights, POS1, cfg)
    assert path.values.shape == (300, 6)
    # lag structure: X_t[n] = X_{t-1}[n-1]
    np.testing.assert_array_equal(path.values[1:, 1:], path.values[:-1, :-1])
    # weighted-l1 norm identity
    manual = np.abs(path.values) @ np.asarray(weights)
    np.testing.assert_allclose(path.norms(), manual)


def test_sequence_space_one_dimensional():
    cfg = PathConfig(100, 0, 0, seed=16)
    path = simulate_sequence_space([1.0], POS1, cfg)
    z = _innovation_block(POS1, 100, 16)
    np.testing.assert_array_equal(path.values, z)


def test_csv_round_trip():
    fam = family_from_coeffs([1.0, 0.5], 1.0, R1)
    path = simulate_linear(fam, POS1, PathConfig(200, 1, 1, seed=17))
    buf = io.StringIO()
    write_path_csv(path, buf)
    buf.seek(0)
    again = read_path_csv(buf, R1)
    np.testing.assert_array_equal(again.values, path.values)  # %.17g round-trips


def test_csv_determinism_bytes():
    fam = family_from_coeffs([1.0], 2.0, R1)
    out = []
    for _ in range(2):
        path = simulate_linear(fam, RegVarDist(2.0, 1.0, Rademacher(0.5)),
                               PathConfig(100, 0, 0, seed=18))
        buf = io.StringIO()
        write_path_csv(path, buf)
        out.append(buf.getvalue())
    assert out[0] == out[1]


def test_two_sided_family():
    # lags {-1, 0}: X_t = Z_{t+1} + Z_t, reconstructed from the raw stream
    fam = family_from_coeffs([1.0, 1.0], 1.0, R1, start=-1)
    cfg = PathConfig(400, 1, 1, seed=19)
    path = simulate_linear(fam, POS1, cfg)
    z = _innovation_block(POS1, 401, 19)
    np.testing.assert_allclose(path.values, z[1:] + z[:-1])
