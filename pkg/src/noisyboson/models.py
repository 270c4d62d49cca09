"""Exact output-probability tables for N bosons on an M-mode noisy network.

Models
------
- ideal / classical single-species tables
- noise-averaged table (no-collision restriction and its general-M extension)
- partial-distinguishability tables, both as a permutation-function double
  sum and in the decomposed quantum-times-classical form
- interference-order truncation and click-number truncation

Table builders fix the input ports to 0..N-1; the entry-level operations
accept arbitrary input port lists.  All tables are exhaustive enumerations;
nothing in this module is Monte Carlo.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from .combinat import (
    configuration_array,
    configuration_count,
    configuration_factorials,
    enumerate_subconfigurations,
    fixed_point_count,
    ports_array,
    ports_of_configuration,
    rank_configurations,
)
from .linalg import is_unitary, permanent, permanent_batch

__all__ = [
    "DistinguishabilityFunction",
    "ProbabilityTable",
    "ideal_probability",
    "classical_probability",
    "uniform_dark_pmf",
    "poisson_dark_pmf",
    "j_evaluate",
    "probability_from_j",
    "ideal_distribution",
    "classical_distribution",
    "noisy_distribution",
    "partial_dist_decomposed",
    "truncated_distribution",
    "click_truncated_distribution",
    "j_model_distribution",
    "decomposed_entry",
    "binomial_weight",
]

NORMALIZATION_TOL = 1e-9
IMAG_TOL = 1e-8

IDEAL_SIZE_LIMIT = 12
J_SUM_SIZE_LIMIT = 7
DECOMPOSED_SIZE_LIMIT = 6
NOISY_SIZE_LIMIT = 8


def binomial_weight(n, total, x):
    """C(total, n) x^n (1-x)^(total-n) with the 0^0 = 1 convention."""
    return math.comb(total, n) * x ** n * (1.0 - x) ** (total - n)


# ---------------------------------------------------------------------------
# distinguishability functions J(sigma)

@dataclass(frozen=True, eq=False)
class DistinguishabilityFunction:
    """Permutation function J(sigma) describing the bosons' internal state.

    kind:
      ideal         J = 1 (fully indistinguishable)
      classical     J = delta_{sigma, identity}
      mixture       brute-force subset double sum for the epsilon-mixture state
      fixed_point   (1-eps)^(N - fixed points), the closed form of the same state
      truncated     fixed_point gated by fixed_points >= N - R
      pure_overlap  prod_k overlap[k, sigma(k)] for pure internal states
    """

    kind: str
    epsilon: float = 0.0
    r: int = 0
    overlap: np.ndarray = None

    @classmethod
    def ideal(cls):
        return cls("ideal")

    @classmethod
    def classical(cls):
        return cls("classical")

    @classmethod
    def mixture(cls, epsilon):
        return cls("mixture", epsilon=float(epsilon))

    @classmethod
    def fixed_point(cls, epsilon):
        return cls("fixed_point", epsilon=float(epsilon))

    @classmethod
    def truncated(cls, epsilon, r):
        if r < 0:
            raise ValueError("r >= 0 required")
        return cls("truncated", epsilon=float(epsilon), r=int(r))

    @classmethod
    def pure_overlap(cls, overlap):
        s = np.asarray(overlap, dtype=np.complex128)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("square overlap matrix required")
        if np.abs(s - s.conj().T).max() > 1e-12:
            raise ValueError("overlap matrix must be hermitian")
        if np.abs(np.diagonal(s) - 1.0).max() > 1e-12:
            raise ValueError("unit diagonal required (normalized states)")
        return cls("pure_overlap", overlap=s)

    def __call__(self, sigma):
        return j_evaluate(self, sigma)


def _j_mixture_brute(sigma, eps):
    # Literal subset double sum: a term for every particle subset K such
    # that sigma fixes the complement of K pointwise.
    n = len(sigma)
    off = [i for i in range(n) if sigma[i] != i]
    total = 0.0
    for q in range(n + 1):
        w = (1.0 - eps) ** q * eps ** (n - q)
        for subset in combinations(range(n), q):
            chosen = set(subset)
            if all(i in chosen for i in off):
                total += w
    return total


def j_evaluate(j, sigma):
    """J(sigma) for a permutation given as a tuple of images."""
    sigma = tuple(sigma)
    n = len(sigma)
    if j.kind == "ideal":
        return complex(1.0)
    if j.kind == "classical":
        return complex(1.0 if all(s == i for i, s in enumerate(sigma)) else 0.0)
    if j.kind == "mixture":
        return complex(_j_mixture_brute(sigma, j.epsilon))
    if j.kind == "fixed_point":
        return complex((1.0 - j.epsilon) ** (n - fixed_point_count(sigma)))
    if j.kind == "truncated":
        c1 = fixed_point_count(sigma)
        if c1 < n - j.r:
            return complex(0.0)
        return complex((1.0 - j.epsilon) ** (n - c1))
    if j.kind == "pure_overlap":
        if j.overlap.shape[0] != n:
            raise ValueError("overlap matrix size does not match permutation")
        val = complex(1.0)
        for k in range(n):
            val *= j.overlap[k, sigma[k]]
        return val
    raise ValueError(f"unknown kind {j.kind!r}")


# ---------------------------------------------------------------------------
# probability tables

@dataclass
class ProbabilityTable:
    """Probability per output configuration, aligned with the canonical
    configuration enumeration for (n_bosons, modes)."""

    n_bosons: int
    modes: int
    probs: np.ndarray
    model_tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = configuration_count(self.n_bosons, self.modes)
        if len(self.probs) != expected:
            raise ValueError(f"expected {expected} entries, got {len(self.probs)}")

    def configurations(self):
        return configuration_array(self.n_bosons, self.modes)

    def index_of(self, m):
        m = np.asarray(m, dtype=np.int64)
        if m.sum() != self.n_bosons or len(m) != self.modes:
            raise ValueError("configuration does not match table support")
        return int(rank_configurations(m[None, :], self.n_bosons, self.modes)[0])

    def entry(self, m):
        return float(self.probs[self.index_of(m)])

    def entries(self):
        """Configuration -> probability map.  Intended for small tables."""
        arr = self.configurations()
        return {tuple(int(x) for x in arr[i]): float(p) for i, p in enumerate(self.probs)}

    def total_probability(self):
        return float(self.probs.sum())

    def min_entry(self):
        return float(self.probs.min())

    def no_collision_mask(self):
        return self.configurations().max(axis=1) <= 1

    def clamped_normalized(self):
        """Copy with negatives clamped to zero and the rest renormalized.

        Sampling necessity for the truncation model, which may carry
        marginally negative raw entries; not a statement about the model.
        """
        clamped = np.clip(self.probs, 0.0, None)
        total = clamped.sum()
        if total <= 0.0:
            raise ValueError("no probability mass after clamping")
        return ProbabilityTable(
            self.n_bosons,
            self.modes,
            clamped / total,
            self.model_tag + "+clamped",
            dict(self.params, clamped=True),
        )

    def assert_normalized(self, tol=NORMALIZATION_TOL):
        total = self.total_probability()
        if abs(total - 1.0) > tol:
            raise ValueError(f"table sums to {total!r}, not 1 within {tol}")
        return self


def _require_ports(u, ports, axis, label):
    limit = u.shape[axis]
    for p in ports:
        if not 0 <= p < limit:
            raise IndexError(f"{label} port {p} out of range for {limit} modes")


def _warn_if_not_unitary(u):
    if not is_unitary(u):
        warnings.warn("matrix is not unitary to 1e-10; probabilities may not normalize",
                      stacklevel=3)


def ideal_probability(u, input_ports, s):
    """p(s | k) = |per U(k|l)|^2 / s!  for indistinguishable bosons.

    input_ports are the occupied input modes k_1..k_n (distinct); s is the
    output configuration, whose port multiset l_1 <= ... <= l_n selects
    columns (repeated for multiply occupied ports).
    """
    u = np.asarray(u, dtype=np.complex128)
    input_ports = list(input_ports)
    n = int(np.sum(s))
    if len(input_ports) != n:
        raise ValueError("len(input_ports) must equal |s|")
    if n > IDEAL_SIZE_LIMIT:
        raise ValueError(f"n <= {IDEAL_SIZE_LIMIT} required")
    if len(set(input_ports)) != n:
        raise ValueError("input ports must be distinct")
    _warn_if_not_unitary(u)
    cols = ports_of_configuration(s)
    _require_ports(u, input_ports, 0, "input")
    _require_ports(u, cols, 1, "output")
    if n == 0:
        return 1.0
    sub = u[np.ix_(input_ports, cols)]
    sfact = 1.0
    for c in s:
        sfact *= math.factorial(int(c))
    return float(abs(permanent(sub)) ** 2 / sfact)


def classical_probability(u, input_ports, r):
    """p_cl(r | k) = per |U|^2(k|l) / r!  for fully distinguishable bosons."""
    u = np.asarray(u, dtype=np.complex128)
    input_ports = list(input_ports)
    n = int(np.sum(r))
    if len(input_ports) != n:
        raise ValueError("len(input_ports) must equal |r|")
    if n > IDEAL_SIZE_LIMIT:
        raise ValueError(f"n <= {IDEAL_SIZE_LIMIT} required")
    if len(set(input_ports)) != n:
        raise ValueError("input ports must be distinct")
    cols = ports_of_configuration(r)
    _require_ports(u, input_ports, 0, "input")
    _require_ports(u, cols, 1, "output")
    if n == 0:
        return 1.0
    sub = np.abs(u[np.ix_(input_ports, cols)]) ** 2
    rfact = 1.0
    for c in r:
        rfact *= math.factorial(int(c))
    return float(permanent(sub).real / rfact)


def _classical_by_permutation_sum(u, input_ports, r):
    # Independent reference: the explicit sum over single-particle routings.
    u = np.asarray(u, dtype=np.complex128)
    cols = ports_of_configuration(r)
    n = len(cols)
    total = 0.0
    for sigma in permutations(range(n)):
        term = 1.0
        for a in range(n):
            term *= abs(u[input_ports[sigma[a]], cols[a]]) ** 2
        total += term
    rfact = 1.0
    for c in r:
        rfact *= math.factorial(int(c))
    return total / rfact


def uniform_dark_pmf(r, modes=None):
    """Occupancy law of |r| independent uniformly placed counts:
    q(r) = |r|! / (r! modes^|r|)."""
    r = tuple(int(x) for x in r)
    if modes is None:
        modes = len(r)
    n_dark = sum(r)
    val = math.factorial(n_dark) / float(modes) ** n_dark
    for c in r:
        val /= math.factorial(c)
    return val


def poisson_dark_pmf(r, nu):
    """Independent Poisson(nu) counts on each of the len(r) detectors:
    q(r) = nu^|r| e^(-M nu) / r!."""
    if nu <= 0:
        raise ValueError("nu > 0 required")
    r = tuple(int(x) for x in r)
    modes = len(r)
    val = nu ** sum(r) * math.exp(-modes * nu)
    for c in r:
        val /= math.factorial(c)
    return val


# ---------------------------------------------------------------------------
# vectorized building blocks

def _submatrix_stack(u, rows, n, modes):
    """(count, n, n) stack of U[rows, l-columns] over all |s| = n configurations."""
    ports = ports_array(n, modes)
    picked = u[list(rows), :][:, ports]          # (n, count, n)
    return np.ascontiguousarray(picked.transpose(1, 0, 2))


def _theta_permutations(n, r):
    """Permutations of S_n kept by the order-R interference cut:
    fixed_point_count >= n - r."""
    return [sigma for sigma in permutations(range(n))
            if fixed_point_count(sigma) >= n - r]


def _quantum_vec(u, k, n, modes, r_trunc=None):
    """p_q(s|k) over all |s| = n configurations; optionally interference-truncated."""
    if n == 0:
        return np.ones(1, dtype=np.float64)
    mats = _submatrix_stack(u, k, n, modes)
    sfact = configuration_factorials(n, modes)
    if r_trunc is None or r_trunc >= n:
        vals = np.abs(permanent_batch(mats)) ** 2
        return vals / sfact
    acc = np.zeros(mats.shape[0], dtype=np.complex128)
    for sigma in _theta_permutations(n, r_trunc):
        v = mats[:, list(sigma), :].conj() * mats
        acc += permanent_batch(v)
    if np.abs(acc.imag).max() > IMAG_TOL:
        raise ValueError("truncated quantum weight has a non-real residue")
    return acc.real / sfact


def _classical_vec(u, rows, n, modes):
    """p_cl(r|rows) over all |r| = n configurations."""
    if n == 0:
        return np.ones(1, dtype=np.float64)
    mats = _submatrix_stack(np.abs(u) ** 2 + 0j, rows, n, modes)
    rfact = configuration_factorials(n, modes)
    return permanent_batch(mats).real / rfact


@lru_cache(maxsize=None)
def _uniform_dark_vec(n, modes):
    vals = math.factorial(n) / configuration_factorials(n, modes) / float(modes) ** n
    vals.setflags(write=False)
    return vals


@lru_cache(maxsize=None)
def _pair_rank(total, modes, nq):
    """(count_s, count_r) index of s + r in the |m| = total enumeration."""
    s_arr = configuration_array(nq, modes).astype(np.int64)
    r_arr = configuration_array(total - nq, modes).astype(np.int64)
    out = np.empty((s_arr.shape[0], r_arr.shape[0]), dtype=np.int64)
    if s_arr.shape[0] <= r_arr.shape[0]:
        for i in range(s_arr.shape[0]):
            out[i, :] = rank_configurations(s_arr[i][None, :] + r_arr, total, modes)
    else:
        for jj in range(r_arr.shape[0]):
            out[:, jj] = rank_configurations(s_arr + r_arr[jj][None, :], total, modes)
    out.setflags(write=False)
    return out


def _decomposed_table(u, total, modes, weights, dark, r_trunc=None):
    """Common engine: p(m) = sum_n w_n C(total,n)^-1 sum_k sum_{s subset m}
    quantum(s|k) * dark(m-s | complement of k)."""
    u = np.asarray(u, dtype=np.complex128)
    count = configuration_count(total, modes)
    probs = np.zeros(count, dtype=np.float64)
    for nq in range(total + 1):
        w = weights[nq]
        if w == 0.0:
            continue
        share = w / math.comb(total, nq)
        pair = _pair_rank(total, modes, nq)
        rvec_uniform = _uniform_dark_vec(total - nq, modes) if dark == "uniform" else None
        for k in combinations(range(total), nq):
            qvec = _quantum_vec(u, k, nq, modes, r_trunc)
            if dark == "uniform":
                rvec = rvec_uniform
            else:
                kbar = tuple(i for i in range(total) if i not in k)
                rvec = _classical_vec(u, kbar, total - nq, modes)
            contrib = share * np.outer(qvec, rvec)
            probs += np.bincount(pair.ravel(), weights=contrib.ravel(), minlength=count)
    return probs


def _binomial_weights(total, eps):
    return [binomial_weight(n, total, 1.0 - eps) for n in range(total + 1)]


def _check_eps(eps):
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps in [0, 1] required")
    return float(eps)


def _check_table_size(total, modes, limit):
    if total < 1:
        raise ValueError("at least one boson required")
    if total > limit:
        raise ValueError(f"table limited to N <= {limit}, got {total}")
    configuration_array(total, modes)  # raises on the enumeration guard


def ideal_distribution(u, total, modes):
    """Exact table for indistinguishable bosons injected in ports 0..total-1."""
    _check_table_size(total, modes, IDEAL_SIZE_LIMIT)
    u = np.asarray(u, dtype=np.complex128)
    _warn_if_not_unitary(u)
    probs = _quantum_vec(u, tuple(range(total)), total, modes)
    return ProbabilityTable(total, modes, probs, "ideal", {}).assert_normalized()


def classical_distribution(u, total, modes):
    """Exact table for fully distinguishable bosons in ports 0..total-1."""
    _check_table_size(total, modes, IDEAL_SIZE_LIMIT)
    u = np.asarray(u, dtype=np.complex128)
    probs = _classical_vec(u, tuple(range(total)), total, modes)
    return ProbabilityTable(total, modes, probs, "classical", {}).assert_normalized()


def noisy_distribution(u, eps, total, modes, regime="general_eq9"):
    """Noise-averaged table: binomially many interfering bosons plus
    uniformly placed dark counts.

    regime "general_eq9" covers every output configuration and sums to 1.
    regime "no_collision_eq5" is its restriction to single-occupancy outputs
    (collision entries are zero and the table totals 1 - O(N^2/M)).
    """
    eps = _check_eps(eps)
    _check_table_size(total, modes, NOISY_SIZE_LIMIT)
    u = np.asarray(u, dtype=np.complex128)
    probs = _decomposed_table(u, total, modes, _binomial_weights(total, eps), "uniform")
    if regime == "general_eq9":
        table = ProbabilityTable(total, modes, probs, "noisy_eq9", {"eps": eps})
        return table.assert_normalized()
    if regime == "no_collision_eq5":
        mask = configuration_array(total, modes).max(axis=1) <= 1
        probs = np.where(mask, probs, 0.0)
        return ProbabilityTable(total, modes, probs, "noisy_eq5",
                                {"eps": eps, "support": "no_collision"})
    raise ValueError(f"unknown regime {regime!r}")


def partial_dist_decomposed(u, eps, total, modes):
    """Partial-distinguishability table in decomposed form: interfering
    subset quantum factor times fully classical factor for the rest."""
    eps = _check_eps(eps)
    _check_table_size(total, modes, DECOMPOSED_SIZE_LIMIT)
    u = np.asarray(u, dtype=np.complex128)
    probs = _decomposed_table(u, total, modes, _binomial_weights(total, eps), "classical")
    table = ProbabilityTable(total, modes, probs, "partial", {"eps": eps})
    return table.assert_normalized()


def truncated_distribution(u, eps, r, total, modes):
    """Partial-distinguishability table with interference above order r cut.

    Raw signed entries are retained (the cut can push individual entries
    marginally below zero); the most negative raw entry is recorded in
    params["min_entry"].  The table still sums to 1 by unitarity.

    r >= total keeps every interference order and reproduces the untruncated
    table exactly.
    """
    eps = _check_eps(eps)
    if r < 0:
        raise ValueError("r >= 0 required")
    _check_table_size(total, modes, DECOMPOSED_SIZE_LIMIT)
    u = np.asarray(u, dtype=np.complex128)
    probs = _decomposed_table(u, total, modes, _binomial_weights(total, eps),
                              "classical", r_trunc=r)
    table = ProbabilityTable(total, modes, probs, "truncated",
                             {"eps": eps, "r": int(r), "min_entry": float(probs.min())})
    return table.assert_normalized()


def click_truncated_distribution(u, eps, r, total, modes):
    """Noise-averaged table conditioned on fewer than r noise clicks.

    Keeps the n >= total - r + 1 interfering-boson terms and rescales by
    their total binomial weight.
    """
    eps = _check_eps(eps)
    if not 1 <= r <= total + 1:
        raise ValueError("1 <= r <= total + 1 required")
    _check_table_size(total, modes, NOISY_SIZE_LIMIT)
    u = np.asarray(u, dtype=np.complex128)
    base = _binomial_weights(total, eps)
    kept = [w if nq >= total - r + 1 else 0.0 for nq, w in enumerate(base)]
    c_r = sum(kept)
    if c_r <= 0.0:
        raise ValueError("allowed click window carries no probability mass "
                         "(eps = 1 with r <= total)")
    weights = [w / c_r for w in kept]
    probs = _decomposed_table(u, total, modes, weights, "uniform")
    table = ProbabilityTable(total, modes, probs, "click_truncated",
                             {"eps": eps, "r": int(r), "weight_kept": float(c_r)})
    return table.assert_normalized()


# ---------------------------------------------------------------------------
# the J-function route to the same probabilities

def _m_factorial(m):
    out = 1.0
    for c in m:
        out *= math.factorial(int(c))
    return out


def probability_from_j(u, j, m):
    """p(m) from the permutation-pair sum with distinguishability function J.

    Internally the sigma_2 sum is folded into a permanent, which is an exact
    regrouping: p = (1/m!) sum_sigma J(sigma) per(W_sigma) with
    W_sigma[a, c] = conj(U[sigma(a), l_c]) U[a, l_c].
    """
    u = np.asarray(u, dtype=np.complex128)
    m = tuple(int(x) for x in m)
    total = sum(m)
    if total > J_SUM_SIZE_LIMIT:
        raise ValueError(f"N <= {J_SUM_SIZE_LIMIT} required for the permutation sum")
    cols = ports_of_configuration(m)
    _require_ports(u, cols, 1, "output")
    a = u[np.ix_(range(total), cols)]
    acc = 0.0 + 0.0j
    for sigma in permutations(range(total)):
        jval = j_evaluate(j, sigma)
        if jval == 0.0:
            continue
        w = a[list(sigma), :].conj() * a
        acc += jval * permanent(w)
    acc /= _m_factorial(m)
    if abs(acc.imag) > IMAG_TOL:
        raise ValueError(f"non-real probability (imag {acc.imag!r}); "
                         "J is not hermitian")
    return float(acc.real)


def _probability_from_j_literal(u, j, m):
    # Definition-level double sum, kept as an oracle for the regrouped form.
    u = np.asarray(u, dtype=np.complex128)
    m = tuple(int(x) for x in m)
    total = sum(m)
    cols = ports_of_configuration(m)
    acc = 0.0 + 0.0j
    perms = list(permutations(range(total)))
    for s1 in perms:
        for s2 in perms:
            srel = tuple(s1[invert_index(s2, i)] for i in range(total))
            term = complex(1.0)
            for k in range(total):
                term *= u[s1[k], cols[k]].conjugate() * u[s2[k], cols[k]]
            acc += j_evaluate(j, srel) * term
    return float((acc / _m_factorial(m)).real)


def invert_index(sigma, i):
    for a, s in enumerate(sigma):
        if s == i:
            return a
    raise ValueError("not a permutation")


def j_model_distribution(u, j, total, modes):
    """Full table of probability_from_j over every output configuration."""
    if total > J_SUM_SIZE_LIMIT:
        raise ValueError(f"N <= {J_SUM_SIZE_LIMIT} required for the permutation sum")
    configuration_array(total, modes)  # enumeration guard
    u = np.asarray(u, dtype=np.complex128)
    mats = _submatrix_stack(u, tuple(range(total)), total, modes)
    acc = np.zeros(mats.shape[0], dtype=np.complex128)
    for sigma in permutations(range(total)):
        jval = j_evaluate(j, sigma)
        if jval == 0.0:
            continue
        w = mats[:, list(sigma), :].conj() * mats
        acc += jval * permanent_batch(w)
    acc /= configuration_factorials(total, modes)
    if np.abs(acc.imag).max() > IMAG_TOL:
        raise ValueError("non-real probabilities; J is not hermitian")
    return ProbabilityTable(total, modes, acc.real.copy(), f"j_{j.kind}",
                            {"eps": j.epsilon, "r": j.r})


# ---------------------------------------------------------------------------
# single-entry decomposed evaluation (cheap at large M)

def decomposed_entry(u, eps, m, r_trunc=None, dark="classical"):
    """One table entry of the decomposed models, without building the table.

    dark="classical" gives the partial-distinguishability value (optionally
    interference-truncated via r_trunc); dark="uniform" replaces every
    classical factor by its noise average, giving the noise-model value.
    """
    eps = _check_eps(eps)
    if dark not in ("classical", "uniform"):
        raise ValueError(f"unknown dark model {dark!r}")
    u = np.asarray(u, dtype=np.complex128)
    m = tuple(int(x) for x in m)
    total = sum(m)
    p = 0.0
    for nq in range(total + 1):
        w = binomial_weight(nq, total, 1.0 - eps)
        if w == 0.0:
            continue
        share = w / math.comb(total, nq)
        for s, r in enumerate_subconfigurations(m, nq):
            if dark == "uniform":
                dark_val_base = uniform_dark_pmf(r, len(m))
            for k in combinations(range(total), nq):
                q = _quantum_entry(u, k, s, r_trunc)
                if dark == "classical":
                    kbar = [i for i in range(total) if i not in k]
                    d = classical_probability(u, kbar, r)
                else:
                    d = dark_val_base
                p += share * q * d
    return p


def _quantum_entry(u, k, s, r_trunc):
    n = sum(s)
    if n == 0:
        return 1.0
    cols = ports_of_configuration(s)
    sub = u[np.ix_(list(k), cols)]
    sfact = _m_factorial(s)
    if r_trunc is None or r_trunc >= n:
        return float(abs(permanent(sub)) ** 2 / sfact)
    acc = 0.0 + 0.0j
    for sigma in _theta_permutations(n, r_trunc):
        w = sub[list(sigma), :].conj() * sub
        acc += permanent(w)
    return float(acc.real / sfact)
