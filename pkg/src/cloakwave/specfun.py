"""Complex-argument Bessel kernel and a safeguarded scalar root finder.

Cylindrical J_n, Y_n, H_n^(1) and spherical j_n, y_n, h_n^(1) for integer
order, with derivatives taken with respect to the argument.  The regular
family is generated by downward (Miller) recurrence; Y_0 and Y_1 come from
Neumann-type expansions over the same J chain, which avoids the cancellation
that kills the classical power series past |z| ~ 10, and higher orders of
the singular family follow by upward recurrence (stable: Y is dominant).

Validated envelope: order <= 200, |z| <= 1e4.  Complex arguments are meant
for mildly lossy media; accuracy degrades like exp(2 Im z) in the Miller
normalization sum, so keep Im z below ~10.  Values that underflow double
precision (huge order, tiny argument) are returned as exact zeros.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BesselDomainError,
    BesselOverflowError,
    BracketError,
    ConvergenceError,
)

ORDER_CAP = 200
ARG_CAP = 1.0e4
EULER_GAMMA = 0.5772156649015328606

_RESCALE_LIMIT = 1.0e250
_OVERFLOW_LIMIT = 1.0e280


@dataclass(frozen=True)
class BesselEval:
    """Value and argument-derivative of one Bessel-family function."""

    value: complex
    derivative: complex


def _check_order_arg(
    n: int, z: complex, singular: bool, cap: int = ORDER_CAP + 1
) -> complex:
    # chains run one order past the public cap to supply derivatives
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise BesselDomainError(f"order must be a nonnegative integer, got {n!r}")
    if n > cap:
        raise BesselDomainError(f"order {n} exceeds cap {ORDER_CAP}")
    z = complex(z)
    if abs(z) > ARG_CAP:
        raise BesselDomainError(f"|z| = {abs(z):.3g} exceeds cap {ARG_CAP:.0e}")
    if singular and z == 0:
        raise BesselDomainError("singular kind is undefined at z = 0")
    return z


def _miller_j_chain(nmax: int, z: complex, spherical: bool) -> np.ndarray:
    """Downward recurrence for the regular family, unnormalized.

    Returns orders 0..M for a start order M comfortably above both nmax and
    the turning point |z|; the caller normalizes.
    """
    az = abs(z)
    m_start = int(nmax + 1.9 * az + 36)
    if m_start % 2:
        m_start += 1
    out = np.zeros(m_start + 1, dtype=complex)
    prev = 0.0 + 0.0j
    cur = 1.0e-280 + 0.0j
    out[m_start] = cur
    half = 0.5 if spherical else 0.0
    for m in range(m_start, 0, -1):
        nxt = (2.0 * (m + half) / z) * cur - prev
        prev, cur = cur, nxt
        out[m - 1] = cur
        if abs(cur.real) > _RESCALE_LIMIT or abs(cur.imag) > _RESCALE_LIMIT:
            out *= 1.0e-250
            prev *= 1.0e-250
            cur *= 1.0e-250
    return out


def _cyl_j_chain_full(nmax: int, z: complex) -> np.ndarray:
    """J_0..J_max over the full Miller window, sum-normalized."""
    raw = _miller_j_chain(nmax, z, spherical=False)
    norm = raw[0] + 2.0 * np.sum(raw[2::2])
    if norm == 0:
        raise BesselOverflowError(f"Miller normalization sum vanished at z = {z}")
    return raw / norm


def _cyl_y01(z: complex, jch: np.ndarray) -> tuple[complex, complex]:
    """Y_0 and Y_1 by Neumann expansions over the normalized J chain.

    Y_0 = (2/pi)[(ln(z/2)+gamma) J_0] + (4/pi) sum_k (-1)^(k+1) J_2k / k and
    its termwise argument-derivative give Y_1 = -Y_0'.  Terms are bounded,
    so there is no cancellation growth at large |z|.
    """
    lg = cmath.log(z / 2.0) + EULER_GAMMA
    even = jch[2::2]
    kk = np.arange(1, len(even) + 1, dtype=float)
    sgn = np.where(kk % 2 == 1, 1.0, -1.0)
    y0 = (2.0 / math.pi) * lg * jch[0] + (4.0 / math.pi) * np.sum(sgn * even / kk)
    lo = jch[1:-2:2]
    hi = jch[3::2]
    m = min(len(lo), len(hi))
    dj_even = 0.5 * (lo[:m] - hi[:m])
    y0p = (2.0 / math.pi) * (jch[0] / z - lg * jch[1])
    y0p += (4.0 / math.pi) * np.sum(sgn[:m] * dj_even / kk[:m])
    return y0, -y0p


def cyl_chain(nmax: int, z: complex) -> tuple[np.ndarray, np.ndarray]:
    """Cylindrical J_n(z) and Y_n(z) for all orders 0..nmax at once.

    Parameters
    ----------
    nmax : highest order required (<= ORDER_CAP).
    z : complex argument, z != 0, |z| <= ARG_CAP.

    Returns
    -------
    (J, Y) : complex arrays of length nmax + 1.
    """
    z = _check_order_arg(nmax, z, singular=True)
    full = _cyl_j_chain_full(nmax, z)
    j = full[: nmax + 1].copy()
    y0, y1 = _cyl_y01(z, full)
    y = np.zeros(nmax + 1, dtype=complex)
    y[0] = y0
    if nmax >= 1:
        y[1] = y1
    for n in range(1, nmax):
        nxt = (2.0 * n / z) * y[n] - y[n - 1]
        if abs(nxt.real) > _OVERFLOW_LIMIT or abs(nxt.imag) > _OVERFLOW_LIMIT:
            raise BesselOverflowError(
                f"Y_{n + 1}({z}) exceeds representable magnitude in upward recurrence"
            )
        y[n + 1] = nxt
    return j, y


def _sph_j_only(nmax: int, z: complex) -> np.ndarray:
    sin_z = cmath.sin(z)
    cos_z = cmath.cos(z)
    j0 = sin_z / z
    j1 = sin_z / (z * z) - cos_z / z
    j = np.zeros(nmax + 1, dtype=complex)
    if nmax <= int(0.9 * abs(z)):
        # upward recurrence is stable below the turning point
        j[0] = j0
        if nmax >= 1:
            j[1] = j1
        for n in range(1, nmax):
            j[n + 1] = (2.0 * n + 1.0) / z * j[n] - j[n - 1]
    else:
        raw = _miller_j_chain(nmax, z, spherical=True)
        if abs(j0) >= abs(j1):
            scale = j0 / raw[0]
        else:
            scale = j1 / raw[1]
        j[:] = raw[: nmax + 1] * scale
    return j


def sph_chain(nmax: int, z: complex) -> tuple[np.ndarray, np.ndarray]:
    """Spherical j_n(z) and y_n(z) for all orders 0..nmax at once.

    j_0 and y_0 are the closed forms sin z / z and -cos z / z; the regular
    chain is normalized against whichever of j_0, j_1 is larger.
    """
    z = _check_order_arg(nmax, z, singular=True)
    j = _sph_j_only(nmax, z)
    sin_z = cmath.sin(z)
    cos_z = cmath.cos(z)
    y = np.zeros(nmax + 1, dtype=complex)
    y[0] = -cos_z / z
    if nmax >= 1:
        y[1] = -cos_z / (z * z) - sin_z / z
    for n in range(1, nmax):
        nxt = (2.0 * n + 1.0) / z * y[n] - y[n - 1]
        if abs(nxt.real) > _OVERFLOW_LIMIT or abs(nxt.imag) > _OVERFLOW_LIMIT:
            raise BesselOverflowError(
                f"y_{n + 1}({z}) exceeds representable magnitude in upward recurrence"
            )
        y[n + 1] = nxt
    return j, y


def _regular_at_zero(n: int, spherical: bool) -> BesselEval:
    if n == 0:
        return BesselEval(1.0 + 0.0j, 0.0 + 0.0j)
    if n == 1:
        return BesselEval(0.0 + 0.0j, (1.0 / 3.0 if spherical else 0.5) + 0.0j)
    return BesselEval(0.0 + 0.0j, 0.0 + 0.0j)


def cyl_bessel(kind: str, n: int, z: complex) -> BesselEval:
    """Cylindrical Bessel function of integer order with derivative.

    Parameters
    ----------
    kind : "J", "Y" or "H1" (Hankel function of the first kind).
    n : integer order, 0 <= n <= 200.
    z : complex argument, |z| <= 1e4; z != 0 for kinds "Y" and "H1".

    Returns
    -------
    BesselEval with H1 = J + iY exactly.
    """
    if kind not in ("J", "Y", "H1"):
        raise BesselDomainError(f"unknown cylindrical kind {kind!r}")
    z = _check_order_arg(n, z, singular=kind != "J", cap=ORDER_CAP)
    if z == 0:
        return _regular_at_zero(n, spherical=False)
    if kind == "J":
        j = _cyl_j_chain_full(n + 1, z)
        val = j[n]
        der = -j[1] if n == 0 else j[n - 1] - (n / z) * j[n]
        return BesselEval(complex(val), complex(der))
    j, y = cyl_chain(n + 1, z)
    if kind == "Y":
        val, der = y[n], (-y[1] if n == 0 else y[n - 1] - (n / z) * y[n])
        return BesselEval(complex(val), complex(der))
    # assemble H1 = J + iY from the component evaluations so the identity
    # holds bitwise for complex arguments too
    jval = j[n]
    jder = -j[1] if n == 0 else j[n - 1] - (n / z) * j[n]
    yval = y[n]
    yder = -y[1] if n == 0 else y[n - 1] - (n / z) * y[n]
    return BesselEval(complex(jval + 1j * yval), complex(jder + 1j * yder))


def sph_bessel(kind: str, n: int, z: complex) -> BesselEval:
    """Spherical Bessel function of integer order with derivative.

    kind is "j", "y" or "h1"; other arguments as in cyl_bessel.  j_0 is
    computed as sin z / z and matches it to full precision by construction.
    """
    if kind not in ("j", "y", "h1"):
        raise BesselDomainError(f"unknown spherical kind {kind!r}")
    z = _check_order_arg(n, z, singular=kind != "j", cap=ORDER_CAP)
    if z == 0:
        return _regular_at_zero(n, spherical=True)
    if kind == "j":
        fam = _sph_j_only(n + 1, z)
    elif kind == "y":
        _, fam = sph_chain(n + 1, z)
    else:
        j, y = sph_chain(n + 1, z)
        jval = j[n]
        jder = -j[1] if n == 0 else j[n - 1] - ((n + 1.0) / z) * j[n]
        yval = y[n]
        yder = -y[1] if n == 0 else y[n - 1] - ((n + 1.0) / z) * y[n]
        return BesselEval(complex(jval + 1j * yval), complex(jder + 1j * yder))
    val = fam[n]
    der = -fam[1] if n == 0 else fam[n - 1] - ((n + 1.0) / z) * fam[n]
    return BesselEval(complex(val), complex(der))


def find_root(
    f: Callable[[float], float],
    bracket: Sequence[float],
    *,
    max_iter: int = 200,
) -> float:
    """Locate a root of a continuous scalar function inside a sign-change bracket.

    Secant-accelerated bisection: every step keeps a valid bracket, so
    convergence is guaranteed; secant candidates are accepted only when they
    fall inside it.  Terminates when the bracket width is below
    1e-14 * max(1, |x|) and |f(x)| <= 1e-13 * scale, where scale is the
    larger endpoint magnitude of f at entry.

    Raises
    ------
    BracketError : endpoints do not straddle a sign change.
    ConvergenceError : budget of max_iter iterations exhausted.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError(f"invalid bracket [{lo}, {hi}]")
    flo = float(f(lo))
    if flo == 0.0:
        return lo
    fhi = float(f(hi))
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f(lo) = {flo:.3g}, f(hi) = {fhi:.3g}"
        )
    scale = max(abs(flo), abs(fhi))
    x, fx = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    for _ in range(max_iter):
        width = hi - lo
        if width <= 1e-14 * max(1.0, abs(x)) and abs(fx) <= 1e-13 * scale:
            return x
        # secant through the bracket endpoints, clipped away from the edges
        denom = fhi - flo
        cand = lo - flo * (hi - lo) / denom if denom != 0.0 else 0.5 * (lo + hi)
        margin = 0.01 * width
        if not (lo + margin <= cand <= hi - margin):
            cand = 0.5 * (lo + hi)
        fcand = float(f(cand))
        if fcand == 0.0:
            return cand
        if math.copysign(1.0, fcand) == math.copysign(1.0, flo):
            lo, flo = cand, fcand
        else:
            hi, fhi = cand, fcand
        x, fx = (cand, fcand) if abs(fcand) <= min(abs(flo), abs(fhi)) else (x, fx)
        if hi - lo >= width * 0.75:
            # secant stagnated; force a bisection step
            mid = 0.5 * (lo + hi)
            fmid = float(f(mid))
            if fmid == 0.0:
                return mid
            if math.copysign(1.0, fmid) == math.copysign(1.0, flo):
                lo, flo = mid, fmid
            else:
                hi, fhi = mid, fmid
            if abs(fmid) < abs(fx):
                x, fx = mid, fmid
    raise ConvergenceError(
        f"root finder exhausted {max_iter} iterations on [{lo}, {hi}]"
    )
