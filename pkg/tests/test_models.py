import math
import warnings
from itertools import permutations

import numpy as np
import pytest

from noisyboson.combinat import enumerate_configurations
from noisyboson.linalg import fourier_unitary, haar_unitary
from noisyboson.models import (
    DistinguishabilityFunction,
    ProbabilityTable,
    binomial_weight,
    classical_probability,
    click_truncated_distribution,
    classical_distribution,
    decomposed_entry,
    ideal_distribution,
    ideal_probability,
    j_evaluate,
    j_model_distribution,
    noisy_distribution,
    partial_dist_decomposed,
    poisson_dark_pmf,
    probability_from_j,
    truncated_distribution,
    uniform_dark_pmf,
    _probability_from_j_literal,
)
from noisyboson.analysis import tvd
from noisyboson.seeding import component_rng


def haar(m, seed):
    return haar_unitary(m, component_rng(seed, "tests/unitary"))


# ---------------------------------------------------------------------------
# single entries


def test_two_boson_bunching_on_balanced_coupler():
    u = fourier_unitary(2)
    # both bosons exit together; the coincidence amplitude cancels
    assert ideal_probability(u, (0, 1), (1, 1)) == pytest.approx(0.0, abs=1e-14)
    assert ideal_probability(u, (0, 1), (2, 0)) == pytest.approx(0.5)
    assert ideal_probability(u, (0, 1), (0, 2)) == pytest.approx(0.5)


def test_classical_has_no_bunching_enhancement():
    u = fourier_unitary(2)
    assert classical_probability(u, (0, 1), (1, 1)) == pytest.approx(0.5)
    assert classical_probability(u, (0, 1), (2, 0)) == pytest.approx(0.25)


def test_single_boson_ideal_equals_classical():
    u = haar(5, 1)
    for port in range(5):
        m = tuple(1 if a == port else 0 for a in range(5))
        assert ideal_probability(u, (2,), m) == pytest.approx(abs(u[2, port]) ** 2)
        assert classical_probability(u, (2,), m) == pytest.approx(
            ideal_probability(u, (2,), m))


def test_classical_probability_matches_assignment_sum():
    u = haar(4, 2)
    k = (0, 1, 3)
    for m in enumerate_configurations(3, 4):
        expected = 0.0
        for assign in permutations(range(3)):
            cols = []
            for port, count in enumerate(m):
                cols.extend([port] * count)
            expected += math.prod(
                abs(u[k[i], cols[assign[i]]]) ** 2 for i in range(3))
        expected /= math.prod(math.factorial(c) for c in m)
        assert classical_probability(u, k, m) == pytest.approx(expected, abs=1e-13)


def test_ideal_probability_validates():
    u = haar(4, 3)
    with pytest.raises(ValueError):
        ideal_probability(u, (0, 0), (2, 0, 0, 0))  # repeated input port
    with pytest.raises(IndexError):
        ideal_probability(u, (0, 9), (1, 1, 0, 0))
    with pytest.warns(UserWarning):
        ideal_probability(u * 1.01, (0, 1), (1, 1, 0, 0))


def test_uniform_dark_pmf():
    # two independent uniform clicks over 3 modes
    assert uniform_dark_pmf((1, 1, 0)) == pytest.approx(2 / 9)
    assert uniform_dark_pmf((2, 0, 0)) == pytest.approx(1 / 9)
    assert uniform_dark_pmf((0, 0, 0)) == 1.0
    total = sum(uniform_dark_pmf(m) for m in enumerate_configurations(3, 4))
    assert total == pytest.approx(1.0, abs=1e-12)
    assert uniform_dark_pmf((1, 1), modes=2) == pytest.approx(0.5)


def test_poisson_dark_pmf():
    nu = 0.2
    assert poisson_dark_pmf((0, 0), nu) == pytest.approx(math.exp(-2 * nu))
    assert poisson_dark_pmf((2, 1), nu) == pytest.approx(
        math.exp(-2 * nu) * nu ** 3 / 2)


def test_binomial_weight_sums_to_one():
    for x in (0.0, 0.3, 1.0):
        assert sum(binomial_weight(n, 6, x) for n in range(7)) == pytest.approx(1.0)
    assert binomial_weight(0, 4, 0.0) == 1.0  # 0^0 convention


# ---------------------------------------------------------------------------
# table builders


def test_ideal_distribution_matches_entries():
    u = haar(5, 4)
    table = ideal_distribution(u, 3, 5)
    assert table.total_probability() == pytest.approx(1.0, abs=1e-9)
    for m in [(3, 0, 0, 0, 0), (1, 1, 1, 0, 0), (0, 2, 0, 1, 0)]:
        assert table.entry(m) == pytest.approx(ideal_probability(u, (0, 1, 2), m))


def test_classical_distribution_matches_entries():
    u = haar(4, 5)
    table = classical_distribution(u, 2, 4)
    for m in enumerate_configurations(2, 4):
        assert table.entry(m) == pytest.approx(classical_probability(u, (0, 1), m))


@pytest.mark.parametrize("eps", [0.0, 0.1, 0.5, 0.9, 1.0])
def test_general_noisy_table_normalizes(eps):
    u = haar(5, 6)
    table = noisy_distribution(u, eps, 3, 5)
    assert abs(table.total_probability() - 1.0) <= 1e-9


def test_noisy_zero_noise_equals_ideal_bitwise():
    u = haar(5, 7)
    ideal = ideal_distribution(u, 3, 5)
    noisy = noisy_distribution(u, 0.0, 3, 5)
    assert np.array_equal(ideal.probs, noisy.probs)


def test_noisy_full_noise_is_uniform_dark():
    u = haar(4, 8)
    table = noisy_distribution(u, 1.0, 2, 4)
    for m in enumerate_configurations(2, 4):
        assert table.entry(m) == pytest.approx(uniform_dark_pmf(m), abs=1e-12)


def test_no_collision_regime_masks_the_general_table():
    u = haar(6, 9)
    full = noisy_distribution(u, 0.4, 2, 6)
    nc = noisy_distribution(u, 0.4, 2, 6, regime="no_collision_eq5")
    mask = full.no_collision_mask()
    assert np.allclose(nc.probs[mask], full.probs[mask])
    assert np.all(nc.probs[~mask] == 0.0)
    assert nc.total_probability() < 1.0


def test_noisy_distribution_rejects_unknown_regime():
    with pytest.raises(ValueError):
        noisy_distribution(haar(4, 9), 0.2, 2, 4, regime="eq7")


def test_partial_limits():
    u = haar(5, 10)
    partial0 = partial_dist_decomposed(u, 0.0, 3, 5)
    assert np.allclose(partial0.probs, ideal_distribution(u, 3, 5).probs,
                       atol=1e-12)
    partial1 = partial_dist_decomposed(u, 1.0, 3, 5)
    assert np.allclose(partial1.probs, classical_distribution(u, 3, 5).probs,
                       atol=1e-12)


@pytest.mark.parametrize("eps", [0.2, 0.7])
def test_partial_normalizes(eps):
    table = partial_dist_decomposed(haar(6, 11), eps, 3, 6)
    assert abs(table.total_probability() - 1.0) <= 1e-9
    # a physical mixture of interfering subsets stays nonnegative
    assert table.min_entry() >= -1e-12


def test_truncation_at_full_order_is_exact():
    u = haar(5, 12)
    partial = partial_dist_decomposed(u, 0.3, 3, 5)
    for r in (3, 5, 9):
        trunc = truncated_distribution(u, 0.3, r, 3, 5)
        assert np.array_equal(trunc.probs, partial.probs)


def test_truncation_at_order_zero_is_classical():
    u = haar(5, 13)
    trunc = truncated_distribution(u, 0.3, 0, 3, 5)
    classical = classical_distribution(u, 3, 5)
    assert np.allclose(trunc.probs, classical.probs, atol=1e-12)


def test_truncation_error_decreases_with_order():
    u = haar(6, 14)
    eps = 0.4
    partial = partial_dist_decomposed(u, eps, 4, 6)
    errors = [tvd(partial, truncated_distribution(u, eps, r, 4, 6))
              for r in range(5)]
    assert errors[-1] == 0.0
    assert all(a >= b - 1e-12 for a, b in zip(errors, errors[1:]))


def test_truncated_records_min_entry():
    table = truncated_distribution(haar(6, 15), 0.5, 1, 4, 6)
    assert table.params["min_entry"] == pytest.approx(table.probs.min())
    assert abs(table.total_probability() - 1.0) <= 1e-9


def test_click_truncated_full_window_is_plain_noisy():
    u = haar(5, 16)
    noisy = noisy_distribution(u, 0.35, 3, 5)
    clicky = click_truncated_distribution(u, 0.35, 4, 3, 5)  # r = total + 1
    assert np.allclose(clicky.probs, noisy.probs, atol=1e-12)
    assert clicky.params["weight_kept"] == pytest.approx(1.0)


def test_click_truncated_normalizes_and_validates():
    u = haar(5, 17)
    table = click_truncated_distribution(u, 0.5, 2, 3, 5)
    assert abs(table.total_probability() - 1.0) <= 1e-9
    with pytest.raises(ValueError):
        click_truncated_distribution(u, 0.5, 0, 3, 5)
    with pytest.raises(ValueError):
        click_truncated_distribution(u, 0.5, 5, 3, 5)
    with pytest.raises(ValueError):
        # every kept term has zero weight at eps = 1
        click_truncated_distribution(u, 1.0, 2, 3, 5)


def test_table_size_guards():
    u = fourier_unitary(16)
    with pytest.raises(ValueError):
        noisy_distribution(u, 0.2, 9, 16)
    with pytest.raises(ValueError):
        partial_dist_decomposed(u, 0.2, 7, 16)


# ---------------------------------------------------------------------------
# distinguishability functions and the permutation-sum route


def test_j_factories_validate():
    with pytest.raises(ValueError):
        DistinguishabilityFunction.truncated(0.2, -1)
    with pytest.raises(ValueError):
        DistinguishabilityFunction.pure_overlap(np.ones((2, 3)))
    with pytest.raises(ValueError):
        DistinguishabilityFunction.pure_overlap([[1.0, 0.5], [0.4, 1.0]])
    with pytest.raises(ValueError):
        DistinguishabilityFunction.pure_overlap([[1.0, 0.5], [0.5, 0.9]])


def test_j_ideal_and_classical_values():
    ideal = DistinguishabilityFunction.ideal()
    classical = DistinguishabilityFunction.classical()
    for sigma in permutations(range(4)):
        assert j_evaluate(ideal, sigma) == 1.0
        expected = 1.0 if sigma == (0, 1, 2, 3) else 0.0
        assert j_evaluate(classical, sigma) == expected


@pytest.mark.parametrize("eps", [0.1, 0.5, 0.9])
def test_j_mixture_equals_fixed_point_closed_form(eps):
    mixture = DistinguishabilityFunction.mixture(eps)
    closed = DistinguishabilityFunction.fixed_point(eps)
    for n in range(1, 6):
        for sigma in permutations(range(n)):
            assert j_evaluate(mixture, sigma) == pytest.approx(
                j_evaluate(closed, sigma), abs=1e-12)


def test_j_truncated_gates_by_moved_points():
    j = DistinguishabilityFunction.truncated(0.3, 2)
    assert j_evaluate(j, (0, 1, 2, 3)) == pytest.approx(1.0)
    assert j_evaluate(j, (1, 0, 2, 3)) == pytest.approx(0.7 ** 2)
    # a 3-cycle moves three points, beyond r = 2
    assert j_evaluate(j, (1, 2, 0, 3)) == 0.0


def test_j_limits():
    for sigma in permutations(range(4)):
        assert j_evaluate(DistinguishabilityFunction.fixed_point(0.0), sigma) == 1.0
        expected = 1.0 if sigma == (0, 1, 2, 3) else 0.0
        assert j_evaluate(DistinguishabilityFunction.fixed_point(1.0), sigma) == expected


def test_j_pure_overlap_identity_matrix_is_classical():
    j = DistinguishabilityFunction.pure_overlap(np.eye(3))
    for sigma in permutations(range(3)):
        expected = 1.0 if sigma == (0, 1, 2) else 0.0
        assert j_evaluate(j, sigma) == expected


def test_probability_from_j_reproduces_the_table_builders():
    u = haar(5, 18)
    eps = 0.45
    ideal = ideal_distribution(u, 3, 5)
    classical = classical_distribution(u, 3, 5)
    partial = partial_dist_decomposed(u, eps, 3, 5)
    for m in [(1, 1, 1, 0, 0), (2, 0, 1, 0, 0), (0, 0, 3, 0, 0)]:
        assert probability_from_j(u, DistinguishabilityFunction.ideal(), m) == \
            pytest.approx(ideal.entry(m), abs=1e-12)
        assert probability_from_j(u, DistinguishabilityFunction.classical(), m) == \
            pytest.approx(classical.entry(m), abs=1e-12)
        assert probability_from_j(u, DistinguishabilityFunction.fixed_point(eps), m) == \
            pytest.approx(partial.entry(m), abs=1e-12)


def test_probability_from_j_matches_literal_double_sum():
    u = haar(4, 19)
    j = DistinguishabilityFunction.fixed_point(0.3)
    for m in [(1, 1, 1, 0), (2, 1, 0, 0), (0, 3, 0, 0)]:
        regrouped = probability_from_j(u, j, m)
        literal = _probability_from_j_literal(u, j, m)
        assert regrouped == pytest.approx(literal, abs=1e-12)


def test_j_model_distribution_matches_decomposed_route():
    u = haar(6, 20)
    eps = 0.25
    via_j = j_model_distribution(u, DistinguishabilityFunction.fixed_point(eps), 3, 6)
    direct = partial_dist_decomposed(u, eps, 3, 6)
    assert np.abs(via_j.probs - direct.probs).max() <= 1e-10


def test_j_model_distribution_truncated_route():
    u = haar(5, 21)
    via_j = j_model_distribution(
        u, DistinguishabilityFunction.truncated(0.5, 1), 3, 5)
    direct = truncated_distribution(u, 0.5, 1, 3, 5)
    assert np.abs(via_j.probs - direct.probs).max() <= 1e-10


def test_probability_from_j_rejects_non_hermitian_j():
    u = haar(3, 22)
    overlap = np.array([[1.0, 0.5 + 0.1j, 0.2],
                        [0.5 - 0.1j, 1.0, 0.3],
                        [0.2, 0.3, 1.0]])
    j = DistinguishabilityFunction.pure_overlap(overlap)
    # hermitian overlap keeps the probability real
    val = probability_from_j(u, j, (1, 1, 1))
    assert 0.0 <= val <= 1.0
    broken = DistinguishabilityFunction(
        "pure_overlap", overlap=np.array([[1.0, 0.9], [0.1j, 1.0]]))
    with pytest.raises(ValueError):
        probability_from_j(haar(2, 23), broken, (2, 0))


# ---------------------------------------------------------------------------
# per-entry decomposed evaluation


def test_decomposed_entry_matches_tables():
    u = haar(5, 24)
    eps = 0.4
    noisy = noisy_distribution(u, eps, 3, 5)
    partial = partial_dist_decomposed(u, eps, 3, 5)
    trunc = truncated_distribution(u, eps, 1, 3, 5)
    for m in [(1, 1, 1, 0, 0), (2, 0, 0, 1, 0), (0, 1, 0, 1, 1)]:
        assert decomposed_entry(u, eps, m, dark="uniform") == \
            pytest.approx(noisy.entry(m), abs=1e-12)
        assert decomposed_entry(u, eps, m, dark="classical") == \
            pytest.approx(partial.entry(m), abs=1e-12)
        assert decomposed_entry(u, eps, m, r_trunc=1, dark="classical") == \
            pytest.approx(trunc.entry(m), abs=1e-12)


def test_decomposed_entry_rejects_unknown_dark_model():
    with pytest.raises(ValueError):
        decomposed_entry(haar(4, 25), 0.2, (1, 1, 0, 0), dark="poisson")


# ---------------------------------------------------------------------------
# table container


def test_table_index_round_trip():
    table = ideal_distribution(haar(5, 26), 2, 5)
    arr = table.configurations()
    for i in range(arr.shape[0]):
        m = tuple(int(x) for x in arr[i])
        assert table.index_of(m) == i
        assert table.entry(m) == table.probs[i]
    assert len(table.entries()) == arr.shape[0]


def test_table_rejects_mismatched_support():
    table = ideal_distribution(haar(4, 27), 2, 4)
    with pytest.raises(ValueError):
        table.index_of((1, 1, 1, 0))
    with pytest.raises(ValueError):
        table.index_of((2, 0, 0))
    with pytest.raises(ValueError):
        ProbabilityTable(2, 4, np.zeros(3), "bad")


def test_clamped_normalized():
    raw = np.array([0.5, -0.01, 0.51])
    table = ProbabilityTable(1, 3, raw, "signed")
    fixed = table.clamped_normalized()
    assert fixed.probs.min() == 0.0
    assert fixed.total_probability() == pytest.approx(1.0)
    assert np.array_equal(table.probs, raw)  # original untouched


def test_assert_normalized_raises():
    table = ProbabilityTable(1, 3, np.array([0.5, 0.2, 0.2]), "short")
    with pytest.raises(ValueError):
        table.assert_normalized()
