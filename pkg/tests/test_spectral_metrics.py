import numpy as np
import pytest

from robinhole.errors import (
    EmptySet,
    InsufficientEigenvalues,
    NonpositiveData,
    WindowMismatch,
)
from robinhole.spectral_metrics import (
    FiniteSpectrumWindow,
    dbar,
    fit_rate,
    hausdorff,
    match_with_multiplicity,
    window_cap,
)


def test_hausdorff_trivial_examples():
    assert hausdorff([1, 2], [1, 2]) == 0.0
    assert hausdorff([0], [3]) == 3.0
    assert hausdorff([1, 2], [1.1, 2.2]) == pytest.approx(0.2, abs=1e-15)


def test_hausdorff_empty():
    with pytest.raises(EmptySet):
        hausdorff([], [1.0])


def _brute_hausdorff(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    d_ab = max(min(abs(x - y) for y in b) for x in a)
    d_ba = max(min(abs(x - y) for y in a) for x in b)
    return max(d_ab, d_ba)


def test_hausdorff_matches_brute_force(rng):
    for _ in range(50):
        a = rng.uniform(0, 50, rng.integers(1, 12))
        b = rng.uniform(0, 50, rng.integers(1, 12))
        assert hausdorff(a, b) == pytest.approx(_brute_hausdorff(a, b), abs=1e-13)


def test_hausdorff_metric_properties(rng):
    # symmetry, identity, triangle inequality over random triples
    for _ in range(1000):
        a = rng.uniform(0, 50, rng.integers(1, 8))
        b = rng.uniform(0, 50, rng.integers(1, 8))
        c = rng.uniform(0, 50, rng.integers(1, 8))
        dab, dba = hausdorff(a, b), hausdorff(b, a)
        assert dab == dba
        assert hausdorff(a, a) == 0.0
        assert dab <= hausdorff(a, c) + hausdorff(c, b) + 1e-12


def test_dbar_trivial_examples():
    w = lambda v: FiniteSpectrumWindow.from_values(v, cap=10.0)
    assert dbar(w([0]), w([1])).value == pytest.approx(0.5, abs=1e-15)
    assert dbar(w([0, 1, 4]), w([0, 1, 4])).value == 0.0
    assert dbar(w([0]), w([1])).truncation_bias == pytest.approx(1 / 11)


def test_dbar_derived_cross_check():
    A = [0.0, 1.0, 4.0]
    B = [0.1, 1.2, 4.5]
    w = lambda v: FiniteSpectrumWindow.from_values(v, cap=10.0)
    got = dbar(w(A), w(B)).value
    expected = _brute_hausdorff([1 / (a + 1) for a in A], [1 / (b + 1) for b in B])
    assert got == pytest.approx(expected, abs=1e-15)


def test_dbar_window_mismatch():
    a = FiniteSpectrumWindow.from_values([1.0], cap=5.0)
    b = FiniteSpectrumWindow.from_values([1.0], cap=6.0)
    with pytest.raises(WindowMismatch):
        dbar(a, b)


def test_dbar_below_hausdorff(rng):
    # the map x -> 1/(x+1) is 1-Lipschitz on [0, inf)
    for _ in range(1000):
        a = rng.uniform(0, 50, rng.integers(1, 8))
        b = rng.uniform(0, 50, rng.integers(1, 8))
        wa = FiniteSpectrumWindow.from_values(a, cap=50.0)
        wb = FiniteSpectrumWindow.from_values(b, cap=50.0)
        assert dbar(wa, wb).value <= hausdorff(a, b) + 1e-12


def test_dbar_window_growth_consistency():
    a = [0.5, 2.0, 7.0]
    b = [0.6, 2.2, 7.5]
    small = dbar(
        FiniteSpectrumWindow.from_values(a, 10.0), FiniteSpectrumWindow.from_values(b, 10.0)
    ).value
    big = dbar(
        FiniteSpectrumWindow.from_values(a, 20.0), FiniteSpectrumWindow.from_values(b, 20.0)
    ).value
    assert small == big


def test_match_identical():
    out = match_with_multiplicity([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 3)
    assert all(gap == 0 for (_, _, gap) in out)


def test_match_index_pairing():
    pi2 = np.pi**2
    ref = [0.0, pi2, pi2]
    pert = [0.01, pi2 + 0.1, pi2 + 0.2]
    gaps = [g for (_, _, g) in match_with_multiplicity(ref, pert, 3)]
    assert gaps == pytest.approx([0.01, 0.1, 0.2])


def test_match_split_double_eigenvalue():
    # symmetric split of a double eigenvalue from a 3x3 matrix perturbation
    delta = 1e-3
    base = np.diag([1.0, 1.0, 3.0])
    pert = base.copy()
    pert[0, 1] = pert[1, 0] = delta
    ref_vals = np.linalg.eigvalsh(base)
    pert_vals = np.linalg.eigvalsh(pert)
    out = match_with_multiplicity(ref_vals, pert_vals, 3)
    assert out[0][2] == pytest.approx(delta, rel=1e-9)
    assert out[1][2] == pytest.approx(delta, rel=1e-9)
    assert out[2][2] < 1e-12


def test_match_insufficient():
    with pytest.raises(InsufficientEigenvalues):
        match_with_multiplicity([1.0], [1.0, 2.0], 2)


def test_fit_rate_exact_lines():
    eps = np.array([0.2, 0.1, 0.05, 0.025])
    s, _, r2 = fit_rate(eps, eps)
    assert s == pytest.approx(1.0, abs=1e-12) and r2 == pytest.approx(1.0)
    s, _, _ = fit_rate(eps, np.sqrt(eps))
    assert s == pytest.approx(0.5, abs=1e-12)
    s, c, _ = fit_rate(eps, 3 * eps ** (1 / 6))
    assert s == pytest.approx(1 / 6, abs=1e-12)
    assert c == pytest.approx(np.log(3.0), abs=1e-12)


def test_fit_rate_validation():
    with pytest.raises(NonpositiveData):
        fit_rate([0.1, 0.05], [1.0, 2.0])
    with pytest.raises(NonpositiveData):
        fit_rate([0.2, 0.1, 0.05], [1.0, 0.0, 1.0])


def test_window_cap_skips_ties():
    pi2 = np.pi**2
    # Neumann square: lambda_5 = lambda_6 = 4 pi^2; next distinct is 5 pi^2
    vals = np.array([0, 1, 1, 2, 4, 4, 5, 5]) * pi2
    cap = window_cap(vals, 5)
    assert cap == pytest.approx(4.5 * pi2)
    assert np.sum(vals <= cap) == 6
