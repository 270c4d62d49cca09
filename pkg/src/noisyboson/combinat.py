"""Permutation counting and occupation-configuration enumeration.

Configurations are canonical occupation vectors (m_1, ..., m_M), never
multisets of port labels, so nothing is double counted.  The enumeration
order puts larger leading occupations first: (2,0), (1,1), (0,2).
"""

import math
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

__all__ = [
    "CONFIGURATION_LIMIT",
    "all_permutations",
    "fixed_point_count",
    "compose",
    "invert",
    "is_derangement_of",
    "subfactorial",
    "derangement_count",
    "chi",
    "chi_enumerated",
    "enumerate_configurations",
    "enumerate_subconfigurations",
    "configuration_array",
    "configuration_count",
    "rank_configurations",
    "ports_array",
    "ports_of_configuration",
    "configuration_of_ports",
    "configuration_factorials",
    "verify_symmetric_sum_identity",
    "verify_port_sum_identity",
]

CONFIGURATION_LIMIT = 10_000_000

CHI_LIMIT = 20


# ---------------------------------------------------------------------------
# permutations

def all_permutations(n):
    """All of S_n as index tuples."""
    return list(permutations(range(n)))


def fixed_point_count(sigma):
    """Number of i with sigma(i) = i."""
    return sum(1 for i, s in enumerate(sigma) if s == i)


def compose(outer, inner):
    """(outer o inner)(i) = outer(inner(i))."""
    return tuple(outer[inner[i]] for i in range(len(inner)))


def invert(sigma):
    out = [0] * len(sigma)
    for i, s in enumerate(sigma):
        out[s] = i
    return tuple(out)


def is_derangement_of(sigma, subset):
    """True iff sigma moves every element of subset and fixes all others.

    Equivalently: the support of sigma is exactly the given subset.
    """
    sub = set(subset)
    for i, s in enumerate(sigma):
        if i in sub:
            if s == i:
                return False
        elif s != i:
            return False
    return True


def subfactorial(n):
    """Number of derangements of n elements, exact integer."""
    if n < 0:
        raise ValueError("n >= 0 required")
    if n == 0:
        return 1
    if n == 1:
        return 0
    a, b = 1, 0  # D_0, D_1
    for k in range(2, n + 1):
        a, b = b, (k - 1) * (a + b)
    return b


def derangement_count(n, s):
    """Permutations of n elements with exactly s fixed points, exact integer."""
    if not 0 <= s <= n:
        raise ValueError("0 <= s <= n required")
    return math.comb(n, s) * subfactorial(n - s)


def chi(n):
    """Sum of 2^(fixed point count) over S_n.

    Computed by the exact integer closed form sum_k n!/k!; bounded below n!*e.
    """
    if n < 0:
        raise ValueError("n >= 0 required")
    if n > CHI_LIMIT:
        raise ValueError(f"chi limited to n <= {CHI_LIMIT}")
    fact_n = math.factorial(n)
    return sum(fact_n // math.factorial(k) for k in range(n + 1))


def chi_enumerated(n):
    """Same quantity by direct enumeration of S_n; independent cross-check."""
    if n > 9:
        raise ValueError("enumeration limited to n <= 9")
    return sum(2 ** fixed_point_count(sigma) for sigma in permutations(range(n)))


# ---------------------------------------------------------------------------
# configurations

def configuration_count(total, modes):
    return math.comb(modes + total - 1, total)


def _check_configuration_guard(total, modes):
    if modes < 1:
        raise ValueError("modes >= 1 required")
    if total < 0:
        raise ValueError("total >= 0 required")
    if configuration_count(total, modes) > CONFIGURATION_LIMIT:
        raise ValueError(
            f"configuration count C({modes + total - 1},{total}) exceeds "
            f"the enumeration guard {CONFIGURATION_LIMIT}"
        )


@lru_cache(maxsize=None)
def configuration_array(total, modes):
    """All occupation vectors with the given total, as a (count, modes) uint8 array.

    Rows are ordered with the first mode's occupation descending, recursively;
    this is the canonical order every table in the package is indexed by.
    """
    _check_configuration_guard(total, modes)
    if modes == 1:
        arr = np.array([[total]], dtype=np.uint8)
    else:
        blocks = []
        for first in range(total, -1, -1):
            rest = configuration_array(total - first, modes - 1)
            block = np.empty((rest.shape[0], modes), dtype=np.uint8)
            block[:, 0] = first
            block[:, 1:] = rest
            blocks.append(block)
        arr = np.vstack(blocks)
    arr.setflags(write=False)
    return arr


def enumerate_configurations(total, modes):
    """All configurations with |m| = total, canonical order, as tuples."""
    arr = configuration_array(total, modes)
    return [tuple(int(x) for x in row) for row in arr]


def enumerate_subconfigurations(m, n):
    """All (s, r) with s_a <= m_a, |s| = n, r = m - s, canonical order."""
    m = tuple(int(x) for x in m)
    total = sum(m)
    if n > total:
        raise ValueError("n <= |m| required")
    out = []

    def rec(idx, left, prefix):
        if idx == len(m):
            if left == 0:
                s = tuple(prefix)
                r = tuple(mi - si for mi, si in zip(m, s))
                out.append((s, r))
            return
        for c in range(min(m[idx], left), -1, -1):
            rec(idx + 1, left - c, prefix + [c])

    rec(0, n, [])
    return out


@lru_cache(maxsize=None)
def _comb_table(n_max, k_max):
    table = np.zeros((n_max + 1, k_max + 1), dtype=np.int64)
    for n in range(n_max + 1):
        for k in range(min(n, k_max) + 1):
            table[n, k] = math.comb(n, k)
    table.setflags(write=False)
    return table


def rank_configurations(rows, total, modes):
    """Rank of each row in the canonical enumeration, vectorized.

    The count of configurations preceding a given m at position p is the
    hockey-stick sum C(modes_rest + g, g) with g = remaining_total - m_p - 1.
    """
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows[None, :]
    comb = _comb_table(modes + total + 1, total + 1)
    remaining = total - np.concatenate(
        [np.zeros((rows.shape[0], 1), dtype=np.int64), np.cumsum(rows, axis=1, dtype=np.int64)],
        axis=1,
    )[:, :-1]
    ranks = np.zeros(rows.shape[0], dtype=np.int64)
    for p in range(modes - 1):
        g = remaining[:, p] - rows[:, p] - 1
        valid = g >= 0
        mm_rest = modes - p - 1
        ranks[valid] += comb[mm_rest + g[valid], g[valid]]
    return ranks


@lru_cache(maxsize=None)
def ports_array(total, modes):
    """Port labels with multiplicity for every configuration, (count, total) int32.

    Row i lists the ascending multiset l_1 <= ... <= l_total realizing
    configuration_array(total, modes)[i].
    """
    arr = configuration_array(total, modes)
    if total == 0:
        out = np.zeros((arr.shape[0], 0), dtype=np.int32)
    else:
        labels = np.tile(np.arange(modes, dtype=np.int32), arr.shape[0])
        out = np.repeat(labels, arr.ravel()).reshape(arr.shape[0], total)
    out.setflags(write=False)
    return out


def ports_of_configuration(m):
    """Ascending port multiset of one configuration."""
    out = []
    for port, count in enumerate(m):
        out.extend([port] * int(count))
    return tuple(out)


def configuration_of_ports(ports, modes):
    m = [0] * modes
    for p in ports:
        m[p] += 1
    return tuple(m)


@lru_cache(maxsize=None)
def configuration_factorials(total, modes):
    """prod_a m_a! for every configuration, (count,) float64."""
    arr = configuration_array(total, modes)
    fact = np.array([math.factorial(k) for k in range(total + 1)], dtype=np.float64)
    out = fact[arr].prod(axis=1)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# summation identities

def verify_symmetric_sum_identity(m, n, f, tol=1e-12):
    """Check the sub-configuration/port-subset summation identity.

    For a function f of the selected sub-configuration s, the plain sum over
    distinct s with |s| = n equals the sum over all n-subsets of port
    positions weighted by prod_a 1/C(m_a, s_a).
    """
    m = tuple(int(x) for x in m)
    if sum(m) > 8:
        raise ValueError("identity check limited to |m| <= 8")
    lhs = sum(f(s) for s, _ in enumerate_subconfigurations(m, n))
    ports = ports_of_configuration(m)
    modes = len(m)
    rhs = 0.0
    for positions in combinations(range(len(ports)), n):
        s = configuration_of_ports([ports[j] for j in positions], modes)
        weight = 1.0
        for ma, sa in zip(m, s):
            weight /= math.comb(ma, sa)
        rhs += f(s) * weight
    return abs(lhs - rhs) <= tol


def verify_port_sum_identity(total, modes, f, tol=1e-12):
    """Check sum over configurations f(m) = sum over port tuples (m!/N!) f(m)."""
    if modes ** total > 10 ** 6:
        raise ValueError("port-tuple sum limited to modes**total <= 1e6")
    lhs = sum(f(tuple(m)) for m in enumerate_configurations(total, modes))
    fact_n = math.factorial(total)
    rhs = 0.0
    import itertools

    for ports in itertools.product(range(modes), repeat=total):
        m = configuration_of_ports(ports, modes)
        weight = 1.0
        for c in m:
            weight *= math.factorial(c)
        rhs += weight / fact_n * f(m)
    return abs(lhs - rhs) <= tol
