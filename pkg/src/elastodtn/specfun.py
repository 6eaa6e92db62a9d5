r"""Stable evaluation of Bessel and Hankel functions of integer order.

Everything the solver needs reduces to :math:`J_n(z)` and :math:`Y_n(z)` for
real :math:`z > 0` and orders up to about a thousand:

* :math:`J_n` by Miller's downward recurrence, normalized with the identity
  :math:`J_0(z) + 2\sum_{k\ge 1} J_{2k}(z) = 1` (no cancellation at any
  argument);
* :math:`Y_0, Y_1` from the computed :math:`J` ladder through Neumann's
  series :math:`Y_0 = \tfrac{2}{\pi}[(\ln(z/2)+\gamma)J_0
  + 2\sum_k (-1)^{k+1} J_{2k}/k]` and its derivative;
* :math:`Y_n` by the (upward-stable) forward recurrence, carried as a
  mantissa/log-scale pair so that orders far beyond the overflow point of
  a plain double remain usable in ratios.

Ratios such as :math:`H_n'(z)/H_n(z)` and :math:`H_n(z_1)/H_n(z_2)` are
formed directly from the scaled representation, which is what keeps the
scattering scalars finite at mode numbers where :math:`|Y_n|` alone would
overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMode, NonPositiveArgument, OverflowRegime

EULER_GAMMA = 0.5772156649015328606065120900824024310421

_MAX_ORDER = 1024
_RESCALE = 1e250
_LOG_RESCALE = math.log(_RESCALE)
_LOG_MAX = math.log(np.finfo(np.float64).max)

# ladders are pure functions of (n_max, z); cache grows by doubling so that
# ascending-order sweeps stay O(n) overall
_ladder_cache: dict[float, tuple[int, np.ndarray, np.ndarray, np.ndarray]] = {}


@dataclass(frozen=True)
class BesselPair:
    """J_n(z) and Y_n(z) at a common order and argument."""

    order: int
    argument: float
    j: float
    y: float


@dataclass(frozen=True)
class HankelValue:
    """H_n^{(1)}(z) together with its derivative."""

    order: int
    argument: float
    h: complex
    h_prime: complex


@dataclass(frozen=True)
class ModeScalars:
    """Scattering scalars of a single Fourier mode.

    alpha_j is kappa_j H_n'(kappa_j r) / H_n(kappa_j r) and
    lambda_n = (n/r)^2 - alpha_1 alpha_2.  All three depend on |n| only.
    """

    n: int
    kappa1: float
    kappa2: float
    radius: float
    alpha1: complex
    alpha2: complex
    lambda_n: complex


def _miller_j(n_hi: int, z: float) -> np.ndarray:
    """J_0..J_{n_hi} by downward recurrence with sum normalization.

    The start order sits above both the requested order and the turning
    point |z|; below the turning point the backward recurrence no longer
    separates J from Y and the classical start rule based on the order
    alone returns garbage.
    """
    start = n_hi + int(math.ceil(10.0 + 2.0 * math.sqrt(n_hi)))
    f = np.zeros(start + 2)
    f[start] = 1e-300
    for n in range(start, 0, -1):
        f[n - 1] = (2.0 * n / z) * f[n] - f[n + 1]
        if abs(f[n - 1]) > _RESCALE:
            f *= 1.0 / _RESCALE
    s = f[0] + 2.0 * f[2::2].sum()
    return f[: n_hi + 1] / s


def _y01_from_j(z: float, J: np.ndarray) -> tuple[float, float]:
    """Seeds Y_0, Y_1 via Neumann's series over the J ladder.

    Requires J up to order ~ z + 40 so the series tail is negligible.
    """
    L = math.log(0.5 * z) + EULER_GAMMA
    kmax = (len(J) - 2) // 2
    k = np.arange(1, kmax + 1)
    signs = np.where(k % 2 == 1, 1.0, -1.0)
    y0 = (2.0 / math.pi) * (L * J[0] + 2.0 * np.sum(signs * J[2 * k] / k))
    # Y_1 = -Y_0' with J_{2k}' = (J_{2k-1} - J_{2k+1}) / 2
    dsum = np.sum(signs * (J[2 * k - 1] - J[2 * k + 1]) / k)
    y1 = (2.0 / math.pi) * (L * J[1] - J[0] / z - dsum)
    return y0, y1


def _build_ladder(n_max: int, z: float):
    n_hi = max(n_max, 1, int(math.ceil(z)) + 44)
    J = _miller_j(n_hi, z)
    y0, y1 = _y01_from_j(z, J)
    mant = np.zeros(n_max + 1)
    slog = np.zeros(n_max + 1)
    mant[0] = y0
    if n_max >= 1:
        mant[1] = y1
    a, b = y0, y1
    cur = 0.0
    for n in range(1, n_max):
        c = (2.0 * n / z) * b - a
        if abs(c) > _RESCALE:
            a *= 1.0 / _RESCALE
            b *= 1.0 / _RESCALE
            c *= 1.0 / _RESCALE
            cur += _LOG_RESCALE
        a, b = b, c
        mant[n + 1] = c
        slog[n + 1] = cur
    return J[: n_max + 1], mant, slog


def _ladder(n_max: int, z: float):
    """Cached (J, Y-mantissa, Y-logscale) arrays for orders 0..n_max."""
    if not z > 0.0:
        raise NonPositiveArgument(f"argument must be positive, got z={z}")
    if n_max > _MAX_ORDER:
        raise ValueError(f"order {n_max} exceeds the supported maximum {_MAX_ORDER}")
    key = float(z)
    hit = _ladder_cache.get(key)
    if hit is not None and hit[0] >= n_max:
        n_c, J, mant, slog = hit
        return J[: n_max + 1], mant[: n_max + 1], slog[: n_max + 1]
    n_req = min(max(n_max, 2 * hit[0] if hit else 0, 8), _MAX_ORDER)
    J, mant, slog = _build_ladder(n_req, z)
    if len(_ladder_cache) > 4096:  # point-cloud sweeps: bound the footprint
        _ladder_cache.clear()
    _ladder_cache[key] = (n_req, J, mant, slog)
    return J[: n_max + 1], mant[: n_max + 1], slog[: n_max + 1]


def bessel_jy(n_max: int, z: float) -> list[BesselPair]:
    """Evaluate (J_n(z), Y_n(z)) for n = 0..n_max.

    Parameters
    ----------
    n_max : int
        Highest order, 0 <= n_max <= 1024.
    z : float
        Argument, z > 0.

    Returns
    -------
    list of BesselPair

    Raises
    ------
    NonPositiveArgument
        If z <= 0.
    OverflowRegime
        If |Y_n(z)| exceeds the largest finite double before n_max is
        reached.  The caller must lower the requested order.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    J, mant, slog = _ladder(n_max, z)
    with np.errstate(over="ignore"):
        total = slog + np.log(np.maximum(np.abs(mant), 1e-320))
    if np.any(total > _LOG_MAX):
        n_bad = int(np.argmax(total > _LOG_MAX))
        raise OverflowRegime(
            f"|Y_{n_bad}({z})| is not representable as a double; "
            f"reduce the order (requested n_max={n_max})"
        )
    Y = mant * np.exp(slog)
    return [BesselPair(n, z, float(J[n]), float(Y[n])) for n in range(n_max + 1)]


def hankel1(n: int, z: float) -> HankelValue:
    """H_n^{(1)}(z) and its derivative for signed integer order.

    Negative orders use H_{-n} = (-1)^n H_n; the derivative comes from
    H_n' = H_{n-1} - (n/z) H_n.
    """
    m = abs(n)
    pairs = bessel_jy(max(m, 1), z)
    h = complex(pairs[m].j, pairs[m].y)
    if m == 0:
        hp = -complex(pairs[1].j, pairs[1].y)
    else:
        h_lo = complex(pairs[m - 1].j, pairs[m - 1].y)
        hp = h_lo - (m / z) * h
    if n < 0 and m % 2 == 1:
        h, hp = -h, -hp
    return HankelValue(n, z, h, hp)


def _log_ratio_prev(m: int, z: float) -> complex:
    """H_{m-1}(z) / H_m(z) for m >= 1, safe at any scale."""
    J, mant, slog = _ladder(m, z)
    damp = math.exp(-slog[m]) if slog[m] < 700.0 else 0.0
    shift = math.exp(min(slog[m - 1] - slog[m], 0.0))
    num = complex(J[m - 1] * damp, mant[m - 1] * shift)
    den = complex(J[m] * damp, mant[m])
    return num / den


def _alpha(m: int, kappa: float, radius: float) -> complex:
    z = kappa * radius
    if m == 0:
        J, mant, slog = _ladder(1, z)
        h0 = complex(J[0], mant[0])
        h1 = complex(J[1], mant[1] * math.exp(slog[1]))
        return kappa * (-h1 / h0)
    return kappa * (_log_ratio_prev(m, z) - m / z)


def mode_scalars(n: int, kappa1: float, kappa2: float, radius: float) -> ModeScalars:
    """Scattering scalars alpha_{1n}, alpha_{2n}, Lambda_n at a given radius.

    Raises DegenerateMode if |Lambda_n| < 1e-14 (the mode matrix would be
    singular; an exceptional frequency/radius pair).
    """
    if not (0.0 < kappa1 < kappa2):
        raise ValueError("wavenumbers must satisfy 0 < kappa1 < kappa2")
    if not radius > 0.0:
        raise NonPositiveArgument("radius must be positive")
    m = abs(n)
    a1 = _alpha(m, kappa1, radius)
    a2 = _alpha(m, kappa2, radius)
    lam = (m / radius) ** 2 - a1 * a2
    if abs(lam) < 1e-14:
        raise DegenerateMode(
            f"Lambda_{n} = {lam} is numerically singular at radius {radius}"
        )
    return ModeScalars(n, kappa1, kappa2, radius, a1, a2, lam)


def _hankel_arg_ratio(m: int, kappa: float, r_num: float, r_den: float) -> complex:
    """H_m(kappa r_num) / H_m(kappa r_den) through the scaled ladders."""
    Jn, mn, sn = _ladder(m, kappa * r_num)
    Jd, md, sd = _ladder(m, kappa * r_den)
    damp = math.exp(-sd[m]) if sd[m] < 700.0 else 0.0
    shift = math.exp(min(sn[m] - sd[m], 700.0))
    num = complex(Jn[m] * damp, mn[m] * shift)
    den = complex(Jd[m] * damp, md[m])
    return num / den


def hankel_ratio_gap(
    n: int, kappa1: float, kappa2: float, R_hat: float, R: float
) -> float:
    """|H_n(k1 R)/H_n(k1 Rh) - H_n(k2 R)/H_n(k2 Rh)|.

    Property-test quantity only: its decay in n is what makes the DtN
    truncation error exponentially small.
    """
    if not (0.0 < R_hat < R):
        raise ValueError("radii must satisfy 0 < R_hat < R")
    if kappa1 == kappa2:
        return 0.0
    m = abs(n)
    r1 = _hankel_arg_ratio(m, kappa1, R, R_hat)
    r2 = _hankel_arg_ratio(m, kappa2, R, R_hat)
    return abs(r1 - r2)


def _jy01_block(z: np.ndarray):
    zmax = float(z.max())
    n_hi = int(math.ceil(zmax)) + 44
    start = n_hi + int(math.ceil(10.0 + 2.0 * math.sqrt(n_hi)))
    F = np.zeros((start + 2, z.size))
    F[start] = 1e-300
    for n in range(start, 0, -1):
        F[n - 1] = (2.0 * n / z) * F[n] - F[n + 1]
        big = np.abs(F[n - 1]) > _RESCALE
        if big.any():
            F[:, big] *= 1.0 / _RESCALE
    s = F[0] + 2.0 * F[2::2].sum(axis=0)
    J = F / s
    L = np.log(0.5 * z) + EULER_GAMMA
    kmax = (start - 1) // 2
    k = np.arange(1, kmax + 1)
    signs = np.where(k % 2 == 1, 1.0, -1.0)
    y0 = (2.0 / math.pi) * (L * J[0] + 2.0 * (signs[:, None] * J[2 * k] / k[:, None]).sum(axis=0))
    dsum = (signs[:, None] * (J[2 * k - 1] - J[2 * k + 1]) / k[:, None]).sum(axis=0)
    y1 = (2.0 / math.pi) * (L * J[1] - J[0] / z - dsum)
    return J[0], J[1], y0, y1


def jy01(z) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (J_0, J_1, Y_0, Y_1) over an array of positive arguments.

    Same algorithm as the scalar path; work is chunked so the internal
    recurrence table stays small.
    """
    z = np.asarray(z, dtype=np.float64)
    if np.any(z <= 0.0):
        raise NonPositiveArgument("arguments must be positive")
    flat = z.ravel()
    out = [np.empty(flat.size) for _ in range(4)]
    step = 16384
    for lo in range(0, flat.size, step):
        block = _jy01_block(flat[lo : lo + step])
        for o, b in zip(out, block):
            o[lo : lo + step] = b
    return tuple(o.reshape(z.shape) for o in out)


def hankel01(z):
    """Vectorized (H_0, H_1, H_0', H_1') of the first kind.

    H_0' = -H_1 and H_1' = H_0 - H_1/z; this is the workhorse for field
    evaluation on point clouds.
    """
    j0, j1, y0, y1 = jy01(z)
    h0 = j0 + 1j * y0
    h1 = j1 + 1j * y1
    return h0, h1, -h1, h0 - h1 / np.asarray(z, dtype=np.float64)
