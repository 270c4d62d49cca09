"""Dense complex linear algebra: permanents and random-matrix ensembles.

Matrices are plain ``numpy.ndarray`` objects with ``complex128`` entries.
"""

import math
from functools import lru_cache
from itertools import permutations

import numpy as np

__all__ = [
    "RYSER_SIZE_LIMIT",
    "NAIVE_SIZE_LIMIT",
    "permanent",
    "permanent_batch",
    "haar_unitary",
    "fourier_unitary",
    "gaussian_matrix",
    "noisy_submatrix",
    "unitarity_deviation",
    "is_unitary",
]

# Double-precision accumulation keeps the relative rounding error of the
# Gray-code sum below ~1e-6 for unit-scale entries up to n = 24; the naive
# n! expansion is memory-bound past n = 9.
RYSER_SIZE_LIMIT = 24
NAIVE_SIZE_LIMIT = 9

UNITARITY_TOL = 1e-10


def _as_square(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"square matrix required, got shape {a.shape}")
    return a


@lru_cache(maxsize=16)
def _permutation_rows(n):
    # (n!, n) index array; ~26 MB at the naive limit n = 9.
    return np.array(list(permutations(range(n))), dtype=np.intp)


def _permanent_naive(a):
    n = a.shape[0]
    if n == 0:
        return complex(1.0)
    perms = _permutation_rows(n)
    factors = a[np.arange(n)[None, :], perms]
    return complex(factors.prod(axis=1).sum())


def _permanent_ryser(a):
    n = a.shape[0]
    if n == 0:
        return complex(1.0)
    rowsum = np.zeros(n, dtype=np.complex128)
    total = 0.0 + 0.0j
    sign = 1.0
    gray = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        bit = 1 << j
        if gray & bit:
            rowsum -= a[:, j]
        else:
            rowsum += a[:, j]
        gray ^= bit
        sign = -sign
        total += sign * rowsum.prod()
    return complex(-total if n % 2 else total)


def permanent(a, method="ryser"):
    """Permanent of a square complex matrix.

    Parameters
    ----------
    a : array_like, shape (n, n)
    method : {"ryser", "naive"}
        "ryser" is the Gray-code inclusion-exclusion algorithm, O(n 2^n),
        usable up to n = 24.  "naive" sums products over all n! permutations
        and serves as an independent oracle, usable up to n = 9.

    Returns
    -------
    complex
        per(a) = sum over permutations sigma of prod_i a[i, sigma(i)].
        The permanent of the empty 0 x 0 matrix is 1.
    """
    a = _as_square(a)
    n = a.shape[0]
    if method == "ryser":
        if n > RYSER_SIZE_LIMIT:
            raise ValueError(f"ryser permanent limited to n <= {RYSER_SIZE_LIMIT}, got {n}")
        return _permanent_ryser(a)
    if method == "naive":
        if n > NAIVE_SIZE_LIMIT:
            raise ValueError(f"naive permanent limited to n <= {NAIVE_SIZE_LIMIT}, got {n}")
        return _permanent_naive(a)
    raise ValueError(f"unknown method {method!r}")


def permanent_batch(mats):
    """Permanents of a stack of equal-size square matrices.

    Parameters
    ----------
    mats : array_like, shape (batch, n, n)

    Returns
    -------
    ndarray, shape (batch,), complex128

    Gray-code Ryser vectorized over the batch axis; exact, not approximate.
    Used by the table builders, which evaluate thousands of small permanents
    per table.
    """
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError(f"(batch, n, n) stack required, got shape {mats.shape}")
    b, n, _ = mats.shape
    if n == 0:
        return np.ones(b, dtype=np.complex128)
    if n > RYSER_SIZE_LIMIT:
        raise ValueError(f"ryser permanent limited to n <= {RYSER_SIZE_LIMIT}, got {n}")
    rowsum = np.zeros((b, n), dtype=np.complex128)
    total = np.zeros(b, dtype=np.complex128)
    sign = 1.0
    gray = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        bit = 1 << j
        if gray & bit:
            rowsum -= mats[:, :, j]
        else:
            rowsum += mats[:, :, j]
        gray ^= bit
        sign = -sign
        total += sign * rowsum.prod(axis=1)
    return -total if n % 2 else total


def haar_unitary(m, rng):
    """Haar-distributed m x m unitary.

    QR decomposition of a complex Ginibre matrix; the phases of diag(R) are
    folded back into the columns of Q.  Without that fix the QR convention
    biases the distribution away from Haar.
    """
    if m < 1:
        raise ValueError("m >= 1 required")
    g = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2.0)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def fourier_unitary(m):
    """Discrete-Fourier unitary; every entry has squared modulus 1/m."""
    if m < 1:
        raise ValueError("m >= 1 required")
    k = np.arange(m)
    return np.exp(2j * np.pi * np.outer(k, k) / m) / math.sqrt(m)


def gaussian_matrix(rows, cols, m, rng):
    """i.i.d. complex Gaussian entries with ⟨|Z_kl|^2⟩ = 1/m.

    Generated as (g1 + i g2)/sqrt(2m) with g1, g2 standard real normals, so
    the variance splits equally between real and imaginary parts.
    """
    if m < 1:
        raise ValueError("m >= 1 required")
    if rows < 0 or cols < 0:
        raise ValueError("non-negative dimensions required")
    g = rng.standard_normal((2, rows, cols))
    return (g[0] + 1j * g[1]) / math.sqrt(2.0 * m)


def noisy_submatrix(u, z, eps, input_ports, output_ports):
    """sqrt(1-eps) U[inputs, outputs] + sqrt(eps) Z.

    The noise model is meaningful only submatrix-by-submatrix (the full noisy
    matrix is not unitary), which is why this takes port lists rather than
    mixing whole matrices.  Output ports may repeat for multiply occupied
    modes; Z must match the selected submatrix shape.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps in [0, 1] required")
    u = np.asarray(u, dtype=np.complex128)
    input_ports = list(input_ports)
    output_ports = list(output_ports)
    if input_ports and not (0 <= min(input_ports) and max(input_ports) < u.shape[0]):
        raise IndexError("input port out of range")
    if output_ports and not (0 <= min(output_ports) and max(output_ports) < u.shape[1]):
        raise IndexError("output port out of range")
    sub = u[np.ix_(input_ports, output_ports)]
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != sub.shape:
        raise ValueError(f"Z shape {z.shape} != submatrix shape {sub.shape}")
    return math.sqrt(1.0 - eps) * sub + math.sqrt(eps) * z


def unitarity_deviation(u):
    """max |U†U - I|."""
    u = _as_square(u)
    m = u.shape[0]
    return float(np.abs(u.conj().T @ u - np.eye(m)).max())


def is_unitary(u, tol=UNITARITY_TOL):
    return unitarity_deviation(u) <= tol
