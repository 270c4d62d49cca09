"""Cross-model consistency checks and the variance-replacement experiment.

The checks re-derive the same probabilities along independent routes and
compare them; each returns a named result with its worst deviation and the
tolerance it was held to.  They are what the `verify` subcommand and the
/v1/verify endpoint run.
"""

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .analysis import average_distinguishability
from .combinat import configuration_array
from .linalg import fourier_unitary, haar_unitary
from .models import (
    DistinguishabilityFunction,
    _decomposed_table,
    _binomial_weights,
    decomposed_entry,
    ideal_distribution,
    j_evaluate,
    j_model_distribution,
    noisy_distribution,
    partial_dist_decomposed,
)
from .samplers import sample_noise_realizations
from .seeding import component_rng

__all__ = [
    "VerificationCheck",
    "VarianceReplacementStats",
    "verify_all",
    "variance_replacement_stats",
    "VERIFY_SIZE_LIMIT",
]

VERIFY_SIZE_LIMIT = 6


@dataclass
class VerificationCheck:
    check: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self):
        return self.max_deviation <= self.tolerance

    def as_dict(self):
        return {
            "check": self.check,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        }


def _check_j_closed_form(total, eps):
    # Brute subset double sum against the fixed-point closed form, every
    # permutation of the full particle set.
    mix = DistinguishabilityFunction.mixture(eps)
    fix = DistinguishabilityFunction.fixed_point(eps)
    dev = 0.0
    for sigma in permutations(range(total)):
        dev = max(dev, abs(j_evaluate(mix, sigma) - j_evaluate(fix, sigma)))
    return VerificationCheck("j_closed_form", float(dev), 1e-12)


def _check_j_path_equivalence(total, modes, eps, seed, corrupt_j):
    # Permutation-sum route versus the decomposed quantum-times-classical
    # route; they are the same polynomial in the matrix entries.
    rng = component_rng(seed, "verify/unitary")
    u = haar_unitary(modes, rng)
    j = DistinguishabilityFunction.fixed_point(eps)
    via_j = j_model_distribution(u, j, total, modes)
    if corrupt_j:
        via_j.probs = via_j.probs * (1.0 + 1e-6) + 1e-9
    decomposed = partial_dist_decomposed(u, eps, total, modes)
    dev = float(np.abs(via_j.probs - decomposed.probs).max())
    return VerificationCheck("j_path_equivalence", dev, 1e-10)


def _check_normalization(total, modes, eps, seed):
    rng = component_rng(seed, "verify/normalization")
    u = haar_unitary(modes, rng)
    probs = _decomposed_table(u, total, modes, _binomial_weights(total, eps), "uniform")
    return VerificationCheck("normalization", abs(float(probs.sum()) - 1.0), 1e-9)


def _check_noise_mc(total, eps, seed, realizations=2000):
    # Dilute-regime instance scaled to keep the run short: the identity being
    # checked is the Gaussian-average one, not a property of the full config.
    n_mc = min(total, 2)
    m_mc = 10 * n_mc * n_mc
    rng = component_rng(seed, "verify/noise_mc")
    u = haar_unitary(m_mc, rng)
    if eps == 0.0:
        avg = sample_noise_realizations(u, 0.0, n_mc, m_mc, 2, rng)
        exact = ideal_distribution(u, n_mc, m_mc)
        mask = exact.no_collision_mask()
        dev = float(np.abs(avg.mean - exact.probs[mask]).max())
        return VerificationCheck("noise_mc", dev, 1e-10)
    avg = sample_noise_realizations(u, eps, n_mc, m_mc, realizations, rng)
    exact = noisy_distribution(u, eps, n_mc, m_mc, regime="no_collision_eq5")
    mask = exact.no_collision_mask()
    z = np.abs(avg.mean - exact.probs[mask]) / avg.stderr
    return VerificationCheck("noise_mc", float(z.max()), 5.0)


def _check_uniform_coincidence():
    # Two bosons on balanced discrete-Fourier networks: outputs whose port
    # pair differs by half the mode count are exactly suppressed.
    dev = 0.0
    for modes in (2, 4):
        table = ideal_distribution(fourier_unitary(modes), 2, modes)
        configs = configuration_array(2, modes)
        for idx in range(len(configs)):
            row = configs[idx]
            ports = np.nonzero(row)[0]
            if len(ports) == 2 and (ports[1] - ports[0]) * 2 == modes:
                dev = max(dev, float(table.probs[idx]))
    return VerificationCheck("uniform_coincidence", dev, 1e-10)


def verify_all(total, modes, eps, seed, corrupt_j=False):
    """Run every consistency check at the configured size.

    corrupt_j perturbs the permutation-sum route; the j_path_equivalence
    check must then fail (negative control for the harness itself).
    """
    if not 1 <= total <= VERIFY_SIZE_LIMIT:
        raise ValueError(
            f"verification guard: 1 <= N <= {VERIFY_SIZE_LIMIT} "
            "(partial_dist_decomposed enumeration limit)")
    if modes < total:
        raise ValueError("M >= N required")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps in [0, 1] required")
    return [
        _check_j_closed_form(total, eps),
        _check_j_path_equivalence(total, modes, eps, seed, corrupt_j),
        _check_normalization(total, modes, eps, seed),
        _check_noise_mc(total, eps, seed),
        _check_uniform_coincidence(),
    ]


@dataclass
class VarianceReplacementStats:
    """Ensemble variance of the truncation error at one fixed output, before
    and after replacing the classical dark factors by their uniform average."""

    output: tuple
    draws: int
    var_before: float
    var_after: float
    diff_stderr: float

    @property
    def variance_change(self):
        return self.var_after - self.var_before

    @property
    def relative_decrease(self):
        if self.var_before == 0.0:
            return 0.0
        return (self.var_before - self.var_after) / self.var_before

    def as_dict(self):
        return {
            "output": list(self.output),
            "draws": self.draws,
            "var_before": self.var_before,
            "var_after": self.var_after,
            "variance_change": self.variance_change,
            "diff_stderr": self.diff_stderr,
            "relative_decrease": self.relative_decrease,
        }


def variance_replacement_stats(total, modes, eps, r, outputs, draws, seed):
    """Sample the network ensemble and, for each fixed output, compare the
    variance of (exact - truncated) probability with classical dark factors
    against the same difference with the factors replaced by their average.

    Averaging removes one fluctuation source, so the variance can only go
    down, and only by a relative amount of order eps^2.
    """
    if draws < 2:
        raise ValueError("draws >= 2 required")
    outputs = [tuple(int(x) for x in m) for m in outputs]
    for m in outputs:
        if len(m) != modes or sum(m) != total:
            raise ValueError(f"output {m} does not match (total, modes)")
    before = np.empty((len(outputs), draws))
    after = np.empty((len(outputs), draws))
    for i in range(draws):
        rng = component_rng(seed, "variance", i)
        u = haar_unitary(modes, rng)
        for jo, m in enumerate(outputs):
            exact_cl = decomposed_entry(u, eps, m, None, "classical")
            trunc_cl = decomposed_entry(u, eps, m, r, "classical")
            exact_un = decomposed_entry(u, eps, m, None, "uniform")
            trunc_un = decomposed_entry(u, eps, m, r, "uniform")
            before[jo, i] = exact_cl - trunc_cl
            after[jo, i] = exact_un - trunc_un
    results = []
    for jo, m in enumerate(outputs):
        b = before[jo]
        a = after[jo]
        var_b = float(np.var(b, ddof=1))
        var_a = float(np.var(a, ddof=1))
        paired = (a - a.mean()) ** 2 - (b - b.mean()) ** 2
        se = float(np.std(paired, ddof=1) / math.sqrt(draws))
        results.append(VarianceReplacementStats(m, draws, var_b, var_a, se))
    return results
