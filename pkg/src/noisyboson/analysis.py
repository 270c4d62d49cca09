"""Distance measures and the tail/TVD bounds that justify truncations.

Everything here is closed-form or a finite sum; the Monte Carlo checks of
these bounds live in the test suite and the verification runner.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .combinat import all_permutations, fixed_point_count

__all__ = [
    "BoundReport",
    "average_distinguishability",
    "average_tvd_bound",
    "binomial_pmf",
    "click_tail",
    "cutoff_interference_order",
    "hoeffding_tail_bound",
    "noise_click_ratio",
    "sufficient_click_order",
    "tvd",
    "evaluate_bounds",
]

BRUTE_SIZE_LIMIT = 8
DEFAULT_EPS_ERR = 0.05


def binomial_pmf(n, total, x):
    """C(total, n) x^n (1-x)^(total-n), with the 0^0 = 1 convention."""
    if not 0 <= n <= total:
        return 0.0
    return math.comb(total, n) * x ** n * (1.0 - x) ** (total - n)


def _as_prob_array(p):
    if hasattr(p, "probs"):
        return np.asarray(p.probs, dtype=np.float64), p
    return np.asarray(p, dtype=np.float64), None


def tvd(p, q, no_collision_only=False):
    """Total variation distance (1/2) sum |p - q|.

    Accepts probability tables or plain arrays over the same support.
    no_collision_only restricts the sum to single-occupancy outputs and
    needs at least one table argument to know the configurations.
    """
    pa, ptab = _as_prob_array(p)
    qa, qtab = _as_prob_array(q)
    if pa.shape != qa.shape:
        raise ValueError("distributions live on different supports")
    if ptab is not None and qtab is not None:
        if (ptab.n_bosons, ptab.modes) != (qtab.n_bosons, qtab.modes):
            raise ValueError("tables have different (n_bosons, modes)")
    if no_collision_only:
        tab = ptab if ptab is not None else qtab
        if tab is None:
            raise ValueError("no_collision_only needs a table argument")
        mask = tab.no_collision_mask()
        return 0.5 * float(np.abs(pa[mask] - qa[mask]).sum())
    return 0.5 * float(np.abs(pa - qa).sum())


def average_distinguishability(total, eps, method="closed"):
    """S_N average of the fixed-point distinguishability function,
    d = (1/N!) sum_sigma (1-eps)^(N - fixed points).

    method "closed" uses the numerically stable polynomial
    sum_j eps^j (1-eps)^(N-j) / j!; "brute" enumerates S_N (N <= 8).
    """
    if total < 1:
        raise ValueError("total >= 1 required")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps in [0, 1] required")
    if method == "closed":
        return float(sum(eps ** j * (1.0 - eps) ** (total - j) / math.factorial(j)
                         for j in range(total + 1)))
    if method == "brute":
        if total > BRUTE_SIZE_LIMIT:
            raise ValueError(f"brute average limited to N <= {BRUTE_SIZE_LIMIT}")
        acc = 0.0
        for sigma in all_permutations(total):
            acc += (1.0 - eps) ** (total - fixed_point_count(sigma))
        return acc / math.factorial(total)
    raise ValueError(f"unknown method {method!r}")


def average_tvd_bound(eps, r):
    """Haar-average TVD between the exact partial-distinguishability law and
    its order-r interference truncation:
    (1/2) sqrt(1 + e/(r+2)!) (1-eps)^(r+1) / sqrt(eps (2-eps))."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps in (0, 1] required (degenerate at eps = 0)")
    if r < 0:
        raise ValueError("r >= 0 required")
    lead = 0.5 * math.sqrt(1.0 + math.e / math.factorial(r + 2))
    return lead * (1.0 - eps) ** (r + 1) / math.sqrt(eps * (2.0 - eps))


def cutoff_interference_order(eps, eps_err):
    """Smallest truncation order whose Haar-average TVD bound falls below
    eps_err / 2, from inverting the bound's leading geometric factor."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps in (0, 1) required")
    if not 0.0 < eps_err < 1.0:
        raise ValueError("eps_err in (0, 1) required")
    num = math.log(math.sqrt(2.0) / (eps_err * math.sqrt(eps)))
    den = math.log(1.0 / (1.0 - eps))
    return max(1, math.ceil(num / den))


def click_tail(eps, total, r):
    """Exact probability of at least r noise clicks out of total bosons,
    sum_{s=r}^{total} C(total, s) eps^s (1-eps)^(total-s)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps in [0, 1] required")
    if not 0 <= r <= total + 1:
        raise ValueError("0 <= r <= total + 1 required")
    return float(sum(binomial_pmf(s, total, eps) for s in range(r, total + 1)))


def hoeffding_tail_bound(eps, total, r):
    """Large-deviation upper bound on click_tail(eps, total, r):
    (total eps / r)^r ((1-eps)/(1 - r/total))^(total-r) for eps < r/total <= 1.

    At r = total the second factor degenerates and the bound is eps^total.
    """
    if not 0 < r <= total:
        raise ValueError("0 < r <= total required")
    if not eps < r / total:
        raise ValueError("eps < r / total required for the bound to decay")
    if r == total:
        return eps ** total
    a = (total * eps / r) ** r
    b = ((1.0 - eps) / (1.0 - r / total)) ** (total - r)
    return a * b


def sufficient_click_order(eps, total, eps_err=DEFAULT_EPS_ERR):
    """Smallest r with the Poisson-style tail certificate
    (r / (e eps total))^r >= e^(-eps total) / eps_err; total + 1 if none
    r <= total qualifies (then the tail is exactly zero)."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps in [0, 1] required")
    if not 0.0 < eps_err < 1.0:
        raise ValueError("eps_err in (0, 1) required")
    if eps == 0.0:
        return 1
    lam = eps * total
    target = math.exp(-lam) / eps_err
    for r in range(math.floor(lam) + 1, total + 1):
        if (r / (math.e * lam)) ** r >= target:
            return r
    return total + 1


def noise_click_ratio(eps, total, eps_err=DEFAULT_EPS_ERR):
    """Fraction of detector clicks that must be budgeted to noise:
    max(sufficient_click_order, ceil(2 eps total)) / total."""
    r = max(sufficient_click_order(eps, total, eps_err),
            math.ceil(2.0 * eps * total))
    return r / total


@dataclass
class BoundReport:
    """One bound evaluation: its value, the inputs it was computed from, and
    whether it holds against an observed quantity ("holds" on its own when
    nothing was observed, "not_applicable" outside the bound's domain)."""

    bound_name: str
    value: float
    inputs: dict = field(default_factory=dict)
    satisfied: str = "holds"

    def as_dict(self):
        return {
            "bound_name": self.bound_name,
            "value": self.value,
            "inputs": dict(self.inputs),
            "satisfied": self.satisfied,
        }


def _report(name, inputs, compute, observed=None, tol=1e-12):
    try:
        value = compute()
    except ValueError:
        return BoundReport(name, float("nan"), inputs, "not_applicable")
    status = "holds"
    if observed is not None:
        status = "holds" if observed <= value + tol else "violated"
    return BoundReport(name, float(value), inputs, status)


def evaluate_bounds(eps, total, r=None, eps_err=DEFAULT_EPS_ERR):
    """Evaluate every bound meaningful for (eps, total, r); bounds whose
    preconditions fail are reported as not_applicable rather than omitted."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps in [0, 1] required")
    if total < 1:
        raise ValueError("total >= 1 required")
    reports = [
        _report("average_distinguishability",
                {"eps": eps, "total": total},
                lambda: average_distinguishability(total, eps)),
        _report("distinguishability_tvd",
                {"eps": eps, "total": total},
                lambda: 1.0 - average_distinguishability(total, eps)),
        _report("cutoff_interference_order",
                {"eps": eps, "eps_err": eps_err},
                lambda: float(cutoff_interference_order(eps, eps_err))),
        _report("sufficient_click_order",
                {"eps": eps, "total": total, "eps_err": eps_err},
                lambda: float(sufficient_click_order(eps, total, eps_err))),
        _report("noise_click_ratio",
                {"eps": eps, "total": total, "eps_err": eps_err},
                lambda: noise_click_ratio(eps, total, eps_err)),
    ]
    if r is not None:
        reports.extend([
            _report("average_tvd",
                    {"eps": eps, "r": r},
                    lambda: average_tvd_bound(eps, r)),
            _report("click_tail",
                    {"eps": eps, "total": total, "r": r},
                    lambda: click_tail(eps, total, r)),
            _report("hoeffding_tail",
                    {"eps": eps, "total": total, "r": r},
                    lambda: hoeffding_tail_bound(eps, total, r)),
        ])
    return reports
