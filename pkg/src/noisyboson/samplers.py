"""Monte Carlo side: table sampling, the compositional noisy sampler, the
noise-matrix realization average, and a chi-square goodness-of-fit check.

All samplers take an explicit numpy Generator; reproducibility is the
caller's seed discipline (see seeding.component_rng).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .combinat import configuration_array, configuration_count, ports_array, rank_configurations
from .linalg import gaussian_matrix, permanent_batch
from .models import ProbabilityTable, _quantum_vec

__all__ = [
    "SampleRecord",
    "EmpiricalDistribution",
    "GofResult",
    "RealizationAverage",
    "sample_table",
    "sample_noisy_compositional",
    "sample_noise_realizations",
    "chi_square_gof",
]

COMPOSITIONAL_SIZE_LIMIT = 6
REALIZATION_SIZE_LIMIT = 5
TABLE_SUM_TOL = 1e-6
GOF_LEVEL = 0.001


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class SampleRecord:
    """One draw from the compositional sampler: the output configuration,
    how many bosons interfered, and how many became noise clicks."""

    configuration: tuple
    n_quantum: int
    n_noise_clicks: int
    seed_tag: str = ""


@dataclass
class EmpiricalDistribution:
    """Tally of drawn output configurations."""

    counts: dict
    total_draws: int

    @classmethod
    def from_occupations(cls, occupations):
        occupations = np.asarray(occupations)
        uniq, cnt = np.unique(occupations, axis=0, return_counts=True)
        counts = {tuple(int(x) for x in row): int(c) for row, c in zip(uniq, cnt)}
        return cls(counts, int(occupations.shape[0]))

    def frequency(self, m):
        return self.counts.get(tuple(int(x) for x in m), 0) / self.total_draws

    def count_array(self, n_bosons, modes):
        """Counts aligned with the canonical configuration enumeration."""
        out = np.zeros(configuration_count(n_bosons, modes), dtype=np.int64)
        if not self.counts:
            return out
        keys = np.array(sorted(self.counts), dtype=np.int64)
        if keys.shape[1] != modes or (keys.sum(axis=1) != n_bosons).any():
            raise ValueError("empirical support does not match (n_bosons, modes)")
        vals = np.array([self.counts[tuple(int(x) for x in k)] for k in keys])
        out[rank_configurations(keys, n_bosons, modes)] = vals
        return out

    def as_array(self, n_bosons, modes):
        if self.total_draws == 0:
            raise ValueError("empty empirical distribution")
        return self.count_array(n_bosons, modes) / self.total_draws


def sample_table(table, draws, seed, normalize=False):
    """Inverse-CDF draws from an exact probability table.

    seed is an integer or a numpy Generator.  Entries must be nonnegative
    (clamped_normalized() first for tables with signed truncation residue)
    and total 1 within 1e-6 unless normalize=True rescales (needed for
    restricted-support tables).
    """
    if draws < 1:
        raise ValueError("draws >= 1 required")
    rng = _as_rng(seed)
    probs = np.asarray(table.probs, dtype=np.float64)
    if probs.min() < -1e-12:
        raise ValueError("negative entries; sample a clamped_normalized() table")
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if normalize:
        if total <= 0.0:
            raise ValueError("no probability mass to sample")
    elif abs(total - 1.0) > TABLE_SUM_TOL:
        raise ValueError(f"table sums to {total!r}; pass normalize=True to rescale")
    cum = np.cumsum(probs)
    cum /= cum[-1]
    idx = np.searchsorted(cum, rng.random(draws), side="right")
    idx = np.minimum(idx, len(probs) - 1)
    hits = np.bincount(idx, minlength=len(probs))
    configs = table.configurations()
    counts = {tuple(int(x) for x in configs[i]): int(hits[i])
              for i in np.nonzero(hits)[0]}
    return EmpiricalDistribution(counts, int(draws))


def _row_cdf(u):
    w = np.abs(u) ** 2
    cum = np.cumsum(w, axis=1)
    return cum / cum[:, -1:]


def sample_noisy_compositional(u, eps, total, modes, draws, seed,
                               dark="uniform", return_records=False, seed_tag=""):
    """Draw output configurations from the decomposed noisy model without
    building the full table.

    Per draw: binomially choose how many bosons interfere, pick the
    interfering input subset uniformly, draw their joint output from the
    exact quantum conditional, and place the rest as dark counts, either
    uniformly (the noise model) or classically routed (dark="classical",
    the partial-distinguishability model).

    All randomness is drawn up front in fixed shapes so a given seed yields
    the same records regardless of grouping internals.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps in [0, 1] required")
    if not 1 <= total <= COMPOSITIONAL_SIZE_LIMIT:
        raise ValueError(f"1 <= total <= {COMPOSITIONAL_SIZE_LIMIT} required")
    if dark not in ("uniform", "classical"):
        raise ValueError(f"unknown dark model {dark!r}")
    if draws < 1:
        raise ValueError("draws >= 1 required")
    rng = _as_rng(seed)
    u = np.asarray(u, dtype=np.complex128)

    ns = rng.binomial(total, 1.0 - eps, size=draws)
    perm = rng.permuted(np.tile(np.arange(total), (draws, 1)), axis=1)
    q_uniform = rng.random(draws)
    dark_uniform = rng.random((draws, total))

    occupations = np.zeros((draws, modes), dtype=np.int16)

    # quantum factor, grouped by (count, input subset)
    for n in range(1, total + 1):
        rows = np.nonzero(ns == n)[0]
        if rows.size == 0:
            continue
        subsets = np.sort(perm[rows, :n], axis=1)
        uniq, inverse = np.unique(subsets, return_inverse=True, axis=0)
        inverse = inverse.reshape(-1)
        cfg = configuration_array(n, modes)
        for g in range(uniq.shape[0]):
            members = rows[inverse == g]
            k = tuple(int(x) for x in uniq[g])
            qvec = _quantum_vec(u, k, n, modes)
            cum = np.cumsum(qvec)
            cum /= cum[-1]
            idx = np.searchsorted(cum, q_uniform[members], side="right")
            idx = np.minimum(idx, len(qvec) - 1)
            occupations[members] += cfg[idx]

    # dark factor: the trailing total - n slots of each draw's permutation
    noise_mask = np.arange(total)[None, :] >= ns[:, None]
    draw_of = np.broadcast_to(np.arange(draws)[:, None], (draws, total))[noise_mask]
    x = dark_uniform[noise_mask]
    if dark == "uniform":
        ports = np.floor(x * modes).astype(np.int64)
    else:
        origin = perm[noise_mask]
        cdf = _row_cdf(u)
        ports = np.empty(x.shape, dtype=np.int64)
        for p in range(total):
            sel = origin == p
            if sel.any():
                ports[sel] = np.searchsorted(cdf[p], x[sel], side="right")
        ports = np.minimum(ports, modes - 1)
    np.add.at(occupations, (draw_of, ports), 1)

    empirical = EmpiricalDistribution.from_occupations(occupations)
    if not return_records:
        return empirical
    records = [
        SampleRecord(tuple(int(c) for c in occupations[i]),
                     int(ns[i]), int(total - ns[i]), seed_tag)
        for i in range(draws)
    ]
    return empirical, records


@dataclass
class RealizationAverage:
    """Per-entry average of exact no-collision probabilities over draws of
    the noise matrix, with realization-to-realization standard errors."""

    n_bosons: int
    modes: int
    realizations: int
    mean: np.ndarray
    stderr: np.ndarray
    no_collision_mass: float
    mass_stderr: float

    @property
    def collision_mass(self):
        return 1.0 - self.no_collision_mass

    def as_table(self):
        mask = configuration_array(self.n_bosons, self.modes).max(axis=1) <= 1
        probs = np.zeros(configuration_count(self.n_bosons, self.modes))
        probs[mask] = self.mean
        return ProbabilityTable(self.n_bosons, self.modes, probs,
                                "realization_mean",
                                {"realizations": self.realizations})


def _no_collision_permanents(w, ports):
    n = w.shape[0]
    if n == 1:
        return w[0, ports[:, 0]]
    if n == 2:
        a, b = ports[:, 0], ports[:, 1]
        return w[0, a] * w[1, b] + w[0, b] * w[1, a]
    if n == 3:
        a, b, c = ports[:, 0], ports[:, 1], ports[:, 2]
        r0, r1, r2 = w
        pair = np.multiply.outer(r1, r2)
        pair = pair + pair.T
        return r0[a] * pair[b, c] + r0[b] * pair[a, c] + r0[c] * pair[a, b]
    mats = np.ascontiguousarray(w[:, ports].transpose(1, 0, 2))
    return permanent_batch(mats)


def sample_noise_realizations(u, eps, total, modes, realizations, seed):
    """Average the exact no-collision output probabilities of the perturbed
    network sqrt(1-eps) U + sqrt(eps) Z over independent draws of Z.

    Valid in the dilute regime modes >= 10 total^2, where the no-collision
    sector carries almost all mass; collision events are discarded and their
    mean frequency reported as collision_mass.  Returns per-entry means and
    standard errors plus the mean no-collision mass.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps in [0, 1] required")
    if realizations < 2:
        raise ValueError("realizations >= 2 required for standard errors")
    if not 1 <= total <= REALIZATION_SIZE_LIMIT:
        raise ValueError(f"1 <= total <= {REALIZATION_SIZE_LIMIT} required")
    if modes < 10 * total * total:
        raise ValueError("modes >= 10 total^2 required (dilute regime)")
    if math.comb(modes, total) > 10_000_000:
        raise ValueError("no-collision enumeration too large")
    rng = _as_rng(seed)
    u = np.asarray(u, dtype=np.complex128)

    mask = configuration_array(total, modes).max(axis=1) <= 1
    ports = ports_array(total, modes)[mask].astype(np.int64)
    count = ports.shape[0]

    mean = np.zeros(count)
    m2 = np.zeros(count)
    mass_mean = 0.0
    mass_m2 = 0.0
    a = math.sqrt(1.0 - eps)
    b = math.sqrt(eps)
    base = u[:total, :]
    for k in range(1, realizations + 1):
        z = gaussian_matrix(total, modes, modes, rng)
        w = a * base + b * z
        vals = np.abs(_no_collision_permanents(w, ports)) ** 2
        delta = vals - mean
        mean += delta / k
        m2 += delta * (vals - mean)
        mass = float(vals.sum())
        d = mass - mass_mean
        mass_mean += d / k
        mass_m2 += d * (mass - mass_mean)

    denom = realizations * (realizations - 1)
    stderr = np.sqrt(m2 / denom)
    mass_stderr = math.sqrt(mass_m2 / denom)
    return RealizationAverage(total, modes, realizations, mean, stderr,
                              mass_mean, mass_stderr)


@dataclass
class GofResult:
    statistic: float
    pvalue: float
    dof: int
    cells: int
    pooled: int = 0
    level: float = GOF_LEVEL

    @property
    def passed(self):
        return self.pvalue >= self.level


def chi_square_gof(empirical, table, min_expected=5.0):
    """Pearson chi-square test of an empirical tally against an exact table,
    failing only below the 0.001 quantile.

    Cells with expected count below min_expected are pooled; a pooled bucket
    still short of min_expected is merged into the smallest retained cell.
    Raises if the empirical distribution is empty or the draw count is too
    small to leave at least two cells.
    """
    if empirical.total_draws == 0:
        raise ValueError("empty empirical distribution")
    probs = np.asarray(table.probs, dtype=np.float64)
    if probs.min() < -1e-12:
        raise ValueError("table has negative entries; clamp before testing")
    probs = np.clip(probs, 0.0, None)
    if abs(probs.sum() - 1.0) > TABLE_SUM_TOL:
        raise ValueError("table must sum to 1 for a goodness-of-fit test")
    n = empirical.total_draws
    observed = empirical.count_array(table.n_bosons, table.modes).astype(np.float64)
    expected = probs * n

    big = expected >= min_expected
    if not big.any():
        raise ValueError("insufficient draws: every expected count is below "
                         f"{min_expected}; increase draws")
    exp_cells = list(expected[big])
    obs_cells = list(observed[big])
    pooled = int((~big).sum())
    pooled_exp = float(expected[~big].sum())
    pooled_obs = float(observed[~big].sum())
    if pooled_exp > 0.0:
        if pooled_exp >= min_expected:
            exp_cells.append(pooled_exp)
            obs_cells.append(pooled_obs)
        else:
            j = int(np.argmin(exp_cells))
            exp_cells[j] += pooled_exp
            obs_cells[j] += pooled_obs
    dof = len(exp_cells) - 1
    if dof < 1:
        raise ValueError("insufficient draws: fewer than two test cells remain")
    exp_arr = np.array(exp_cells)
    obs_arr = np.array(obs_cells)
    statistic = float(((obs_arr - exp_arr) ** 2 / exp_arr).sum())
    pvalue = float(stats.chi2.sf(statistic, dof))
    return GofResult(statistic, pvalue, dof, len(exp_cells), pooled)
