"""Exact per-mode transfer-matrix solver for concentric layered media.

Each angular mode of the Helmholtz equation in a concentric isotropic
medium reduces to a radial two-point transmission problem.  Coefficients
are propagated across interfaces by 2x2 matrices built from continuity of
the field and of the flux a * du/dr; a dense assembly of the full interface
system exists as a test oracle only.

Also here: the small-inclusion (virtual) media obtained by pulling the
cloak problem back through the blow-up map, the closed-form monopole
scattering coefficient for a single inclusion, the resonant-density tuning
used by the instability experiment, resonance detection, and the
interior-eigenfunction-source solve that drives the blow-up experiment.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from . import specfun
from .errors import (
    BracketError,
    SingularSystemError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .quadrature import integrate
from .specfun import find_root

FREQUENCY_CAP = 50.0
CONDITION_CAP = 1.0e12

# mpmath's working precision is process-global; concurrent sweep rows must
# not race the extended-precision sections
_MP_LOCK = threading.Lock()


# ---------------------------------------------------------------------------
# media


@dataclass(frozen=True)
class Layer:
    """One concentric isotropic layer: outer radius, stiffness, density."""

    radius: float
    a: float
    sigma: complex

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValidationError(f"layer radius must be positive, got {self.radius}")
        if self.a <= 0:
            raise ValidationError(f"layer stiffness must be positive, got {self.a}")
        s = complex(self.sigma)
        if s.real <= 0 or s.imag < 0:
            raise ValidationError(
                f"layer density must have Re > 0 and Im >= 0, got {s}"
            )


@dataclass(frozen=True)
class LayeredMedium:
    """Concentric layers (innermost first) in a homogeneous exterior."""

    dimension: int
    layers: tuple[Layer, ...]
    exterior_a: float = 1.0
    exterior_sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.dimension not in (2, 3):
            raise ValidationError(f"dimension must be 2 or 3, got {self.dimension}")
        if not self.layers:
            raise ValidationError("medium needs at least one layer")
        radii = [lay.radius for lay in self.layers]
        if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
            raise ValidationError(f"layer radii must increase strictly: {radii}")
        if self.exterior_a <= 0 or self.exterior_sigma <= 0:
            raise ValidationError("exterior coefficients must be positive")

    @property
    def outer_radius(self) -> float:
        return self.layers[-1].radius

    def wavenumber(self, k: float, index: int) -> complex:
        lay = self.layers[index]
        return k * cmath.sqrt(complex(lay.sigma) / lay.a)

    def exterior_wavenumber(self, k: float) -> float:
        return k * math.sqrt(self.exterior_sigma / self.exterior_a)


@dataclass(frozen=True)
class CloakConfig:
    """One cloaking experiment: geometry, frequency and regularization.

    Interior layers are given at unit scale (outermost radius 1) and
    describe the material filling the cloaked region.
    """

    dimension: int
    k: float
    epsilon: float
    interior: tuple[Layer, ...]
    incident: object | None = None

    def __post_init__(self) -> None:
        if self.dimension not in (2, 3):
            raise ValidationError(f"dimension must be 2 or 3, got {self.dimension}")
        if self.k <= 0 or self.k > FREQUENCY_CAP:
            raise ValidationError(f"k must lie in (0, {FREQUENCY_CAP}], got {self.k}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValidationError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not self.interior:
            raise ValidationError("interior needs at least one layer")
        if abs(self.interior[-1].radius - 1.0) > 1e-12:
            raise ValidationError("outermost interior layer radius must be 1")


def virtual_medium(config: CloakConfig) -> LayeredMedium:
    """Small-inclusion medium equivalent to the cloak problem.

    Interior radii shrink to r * eps and the coefficients pick up the
    factors eps^(2-d) and eps^(-d); the exterior is free space.
    """
    eps, d = config.epsilon, config.dimension
    layers = tuple(
        Layer(lay.radius * eps, lay.a * eps ** (2 - d), lay.sigma * eps ** (-d))
        for lay in config.interior
    )
    return LayeredMedium(dimension=d, layers=layers)


def blown_up_medium(config: CloakConfig) -> LayeredMedium:
    """Virtual medium rescaled to unit inclusion radius.

    Substituting U(x) = u(eps x) keeps outgoing coefficients unchanged and
    turns the exterior into (1, eps^2) with interior (a, sigma) * eps^(2-d).
    """
    eps, d = config.epsilon, config.dimension
    layers = tuple(
        Layer(lay.radius, lay.a * eps ** (2 - d), lay.sigma * eps ** (2 - d))
        for lay in config.interior
    )
    return LayeredMedium(
        dimension=d, layers=layers, exterior_a=1.0, exterior_sigma=eps**2
    )


# ---------------------------------------------------------------------------
# radial basis helpers


def _regular(d: int, n: int, z: complex) -> specfun.BesselEval:
    return specfun.sph_bessel("j", n, z) if d == 3 else specfun.cyl_bessel("J", n, z)


def _singular(d: int, n: int, z: complex) -> specfun.BesselEval:
    return specfun.sph_bessel("y", n, z) if d == 3 else specfun.cyl_bessel("Y", n, z)


def _outgoing(d: int, n: int, z: complex) -> specfun.BesselEval:
    return specfun.sph_bessel("h1", n, z) if d == 3 else specfun.cyl_bessel("H1", n, z)


def angular_eigenvalue(d: int, n: int) -> float:
    """Eigenvalue of the angular Laplacian for mode n."""
    return float(n * (n + 1)) if d == 3 else float(n * n)


def _interface_matrix(
    d: int, n: int, a: float, kappa: complex, r: float, outgoing: bool
) -> np.ndarray:
    """Columns: (regular, singular-or-outgoing) basis; rows: value, flux."""
    reg = _regular(d, n, kappa * r)
    sing = _outgoing(d, n, kappa * r) if outgoing else _singular(d, n, kappa * r)
    return np.array(
        [
            [reg.value, sing.value],
            [a * kappa * reg.derivative, a * kappa * sing.derivative],
        ],
        dtype=complex,
    )


def _cond2x2(m: np.ndarray) -> float:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    fro2 = float(np.sum(np.abs(m) ** 2))
    if det == 0:
        return math.inf
    smax2 = 0.5 * (fro2 + math.sqrt(max(fro2 * fro2 - 4.0 * abs(det) ** 2, 0.0)))
    return smax2 / abs(det)


def _solve2x2(m: np.ndarray, rhs: np.ndarray, context: str) -> np.ndarray:
    # equilibrate columns first (each column's value/flux ratio is modest,
    # while the regular/singular ratio between columns can exceed the double
    # range for deep evanescent modes), then rows; only near-parallel
    # columns (a true resonance) should trip the condition check
    cs = np.maximum(np.max(np.abs(m), axis=0), 1e-300)
    ms = m / cs[None, :]
    rs = np.maximum(np.max(np.abs(ms), axis=1), 1e-300)
    ms = ms / rs[:, None]
    cond = _cond2x2(ms)
    if not cond < CONDITION_CAP:
        raise SingularSystemError(
            f"interface system in {context} has condition number {cond:.3e}"
        )
    b = rhs / rs
    det = ms[0, 0] * ms[1, 1] - ms[0, 1] * ms[1, 0]
    y0 = (ms[1, 1] * b[0] - ms[0, 1] * b[1]) / det
    y1 = (ms[0, 0] * b[1] - ms[1, 0] * b[0]) / det
    return np.array([y0 / cs[0], y1 / cs[1]], dtype=complex)


# ---------------------------------------------------------------------------
# mode solutions


@dataclass(frozen=True)
class ParticularTerm:
    """Analytic particular solution for a single-mode interior source.

    The profile is q * r * R_n'(kappa r) with q = coefficient when the
    source oscillates at the layer wavenumber (derivative-in-wavenumber
    identity), or q * R_n(kappa_source r) off resonance.
    """

    kind: str
    coefficient: complex
    kappa: complex
    kappa_source: complex
    order: int
    dimension: int

    def eval(self, r: float) -> tuple[complex, complex]:
        d, n, q = self.dimension, self.order, self.coefficient
        if self.kind == "kappa_derivative":
            kap = self.kappa
            reg = _regular(d, n, kap * r)
            if r == 0.0:
                return 0.0 + 0.0j, q * reg.derivative
            z = kap * r
            nu = angular_eigenvalue(d, n)
            d2 = -(d - 1.0) / z * reg.derivative - (1.0 - nu / (z * z)) * reg.value
            value = q * r * reg.derivative
            deriv = q * (reg.derivative + kap * r * d2)
            return value, deriv
        reg = _regular(d, n, self.kappa_source * r)
        return q * reg.value, q * self.kappa_source * reg.derivative


@dataclass(frozen=True)
class ModeSolution:
    """Coefficients of one angular mode of a transmission solve."""

    n: int
    b_n: complex
    alpha_n: complex
    layer_coeffs: tuple[tuple[complex, complex], ...]
    particular: ParticularTerm | None = None


def mode_solve(medium: LayeredMedium, k: float, n: int, b_n: complex) -> ModeSolution:
    """Solve one angular mode of the scattering problem.

    The exterior field is b_n * (regular basis) + alpha_n * (outgoing basis)
    of argument k_ext r; interior coefficients enforce continuity of the
    field and of a * du/dr at every interface, with only the regular basis
    in the innermost layer.

    Raises SingularSystemError when an interface system is numerically
    singular (a true resonance hit); never regularizes silently.
    """
    if k <= 0 or k > FREQUENCY_CAP:
        raise ValidationError(f"k must lie in (0, {FREQUENCY_CAP}], got {k}")
    if n < 0 or n > specfun.ORDER_CAP:
        raise ValidationError(f"mode {n} outside [0, {specfun.ORDER_CAP}]")
    d = medium.dimension
    vec = np.array([1.0 + 0.0j, 0.0 + 0.0j])
    raw: list[tuple[complex, complex]] = []
    for i, lay in enumerate(medium.layers):
        raw.append((vec[0], vec[1]))
        kap = medium.wavenumber(k, i)
        left = _interface_matrix(d, n, lay.a, kap, lay.radius, outgoing=False)
        rhs = left @ vec
        last = i == len(medium.layers) - 1
        if last:
            kap_r = medium.exterior_wavenumber(k)
            a_r = medium.exterior_a
        else:
            kap_r = medium.wavenumber(k, i + 1)
            a_r = medium.layers[i + 1].a
        right = _interface_matrix(d, n, a_r, kap_r, lay.radius, outgoing=last)
        vec = _solve2x2(right, rhs, f"mode {n} at radius {lay.radius:.6g}")
    c_ext, d_ext = vec
    if abs(c_ext) * CONDITION_CAP < abs(d_ext) or c_ext == 0:
        raise SingularSystemError(
            f"mode {n}: vanishing regular exterior component (resonant system)"
        )
    if abs(d_ext) <= 1e-14 * abs(c_ext):
        # below the noise floor of the interface solve; reporting a nonzero
        # value here would let the singular-basis growth of deep evanescent
        # modes amplify round-off into the evaluated field
        d_ext = 0.0 + 0.0j
    scale = b_n / c_ext
    alpha = d_ext * scale
    coeffs = tuple((c * scale, dd * scale) for c, dd in raw)
    return ModeSolution(n=n, b_n=complex(b_n), alpha_n=complex(alpha), layer_coeffs=coeffs)


def mode_solve_dense(
    medium: LayeredMedium, k: float, n: int, b_n: complex
) -> ModeSolution:
    """Dense assembly of the full interface system; test oracle only."""
    d = medium.dimension
    nlay = len(medium.layers)
    size = 2 * nlay
    A = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)

    def col_of(layer: int) -> tuple[int, int]:
        # innermost layer holds a single regular coefficient
        return (0, -1) if layer == 0 else (2 * layer - 1, 2 * layer)

    for i, lay in enumerate(medium.layers):
        kap = medium.wavenumber(k, i)
        left = _interface_matrix(d, n, lay.a, kap, lay.radius, outgoing=False)
        c_col, d_col = col_of(i)
        for row in (0, 1):
            A[2 * i + row, c_col] += left[row, 0]
            if d_col >= 0:
                A[2 * i + row, d_col] += left[row, 1]
        last = i == nlay - 1
        if last:
            kap_r = medium.exterior_wavenumber(k)
            right = _interface_matrix(
                d, n, medium.exterior_a, kap_r, lay.radius, outgoing=True
            )
            for row in (0, 1):
                A[2 * i + row, size - 1] -= right[row, 1]
                rhs[2 * i + row] += b_n * right[row, 0]
        else:
            kap_r = medium.wavenumber(k, i + 1)
            right = _interface_matrix(
                d, n, medium.layers[i + 1].a, kap_r, lay.radius, outgoing=False
            )
            c_col, d_col = col_of(i + 1)
            for row in (0, 1):
                A[2 * i + row, c_col] -= right[row, 0]
                A[2 * i + row, d_col] -= right[row, 1]
    sol = np.linalg.solve(A, rhs)
    coeffs = [(sol[0], 0.0 + 0.0j)]
    for i in range(1, nlay):
        coeffs.append((sol[2 * i - 1], sol[2 * i]))
    return ModeSolution(
        n=n, b_n=complex(b_n), alpha_n=complex(sol[-1]), layer_coeffs=tuple(coeffs)
    )


def continuity_residual(medium: LayeredMedium, k: float, sol: ModeSolution) -> float:
    """Worst relative interface mismatch of a mode solution (diagnostic)."""
    d, n = medium.dimension, sol.n
    worst = 0.0
    for i, lay in enumerate(medium.layers):
        kap = medium.wavenumber(k, i)
        left = _interface_matrix(d, n, lay.a, kap, lay.radius, outgoing=False)
        lval = left @ np.array(sol.layer_coeffs[i])
        if sol.particular is not None and i == 0:
            pv, pd = sol.particular.eval(lay.radius)
            lval = lval + np.array([pv, lay.a * pd])
        last = i == len(medium.layers) - 1
        if last:
            right = _interface_matrix(
                d, n, medium.exterior_a, medium.exterior_wavenumber(k),
                lay.radius, outgoing=True,
            )
            rvec = np.array([sol.b_n, sol.alpha_n])
        else:
            right = _interface_matrix(
                d, n, medium.layers[i + 1].a, medium.wavenumber(k, i + 1),
                lay.radius, outgoing=False,
            )
            rvec = np.array(sol.layer_coeffs[i + 1])
        rval = right @ rvec
        scale = max(np.max(np.abs(lval)), np.max(np.abs(rval)), 1e-300)
        worst = max(worst, float(np.max(np.abs(lval - rval)) / scale))
    return worst


# ---------------------------------------------------------------------------
# closed-form monopole coefficient and tuning


def alpha0_closed_form(d: int, k: float, eps: float, k_eps) -> complex:
    """Monopole scattering coefficient of the rescaled single inclusion.

    k_eps is the interior Bessel argument at the unit interface; it may be
    a float or an (hi, lo) pair representing a double-double value, in
    which case the expression is evaluated in extended precision (needed
    to resolve the tuned configuration at small eps, where the imaginary
    part of the denominator has slope ~ 1/eps^2 in k_eps).
    """
    if d not in (2, 3):
        raise ValidationError(f"dimension must be 2 or 3, got {d}")
    if isinstance(k_eps, tuple):
        return _alpha0_mp(d, k, eps, k_eps)
    ke = k * eps
    reg_e = _regular(d, 0, ke)
    out_e = _outgoing(d, 0, ke)
    reg_i = _regular(d, 0, k_eps)
    flux = 1.0 / eps if d == 3 else 1.0
    num = ke * reg_e.derivative * reg_i.value - flux * k_eps * reg_e.value * reg_i.derivative
    den = ke * out_e.derivative * reg_i.value - flux * k_eps * out_e.value * reg_i.derivative
    if abs(den) <= 1e-280 * max(1.0, abs(num)):
        raise ZeroDivisionError("alpha0 denominator vanished to machine precision")
    return complex(-num / den)


def _alpha0_mp(d: int, k: float, eps: float, k_eps: tuple[float, float]) -> complex:
    with _MP_LOCK, mp.workdps(50):
        t = mp.mpf(k_eps[0]) + mp.mpf(k_eps[1])
        ke = mp.mpf(k) * mp.mpf(eps)
        if d == 3:
            j = lambda z: mp.sin(z) / z
            jp = lambda z: mp.cos(z) / z - mp.sin(z) / z**2
            h = lambda z: (mp.sin(z) - 1j * mp.cos(z)) / z
            hp = lambda z: (
                (mp.cos(z) + 1j * mp.sin(z)) / z
                - (mp.sin(z) - 1j * mp.cos(z)) / z**2
            )
            flux = 1 / mp.mpf(eps)
        else:
            j = lambda z: mp.besselj(0, z)
            jp = lambda z: -mp.besselj(1, z)
            h = lambda z: mp.besselj(0, z) + 1j * mp.bessely(0, z)
            hp = lambda z: -(mp.besselj(1, z) + 1j * mp.bessely(1, z))
            flux = mp.mpf(1)
        num = ke * jp(ke) * j(t) - flux * t * j(ke) * jp(t)
        den = ke * hp(ke) * j(t) - flux * t * h(ke) * jp(t)
        return complex(-num / den)


@dataclass(frozen=True)
class ResonanceSpec:
    """An interior resonance: mode index and resonant Bessel argument.

    kappa_star is the interior argument k * sqrt(sigma / a) at resonance
    and sigma0 the equation-consistent resonant density for the frequency
    at which it was detected.
    """

    dimension: int
    mode: int
    kappa_star: float
    sigma0: float
    a: float = 1.0

    @property
    def frequency(self) -> float:
        return self.kappa_star * math.sqrt(self.a / self.sigma0)


def resonance_condition(d: int, n: int, kappa: float, a: float = 1.0) -> tuple[float, float]:
    """(raw, normalized) modal resonance condition at interior argument kappa.

    Zero marks a resonance: in 3d a Neumann eigenvalue j_n'(kappa) = 0; in
    2d the matching of the interior mode to the decaying exterior harmonic,
    J_0'(kappa) = 0 for the monopole and a kappa J_n'(kappa) + n J_n(kappa)
    for n >= 1.
    """
    if d == 3:
        ev = _regular(3, n, kappa)
        raw = ev.derivative.real
        scale = abs(ev.value) + abs(ev.derivative)
    elif n == 0:
        ev = _regular(2, 0, kappa)
        raw = ev.derivative.real
        scale = abs(ev.value) + abs(ev.derivative)
    else:
        ev = _regular(2, n, kappa)
        raw = (a * kappa * ev.derivative + n * ev.value).real
        scale = abs(a * kappa * ev.derivative) + abs(n * ev.value)
    return raw, raw / max(scale, 1e-300)


def first_resonance(d: int, k: float, mode: int = 0, a: float = 1.0) -> ResonanceSpec:
    """First resonant density of the given mode at frequency k."""
    grid = np.linspace(0.3, 12.0, 2400)
    vals = [resonance_condition(d, mode, x, a)[0] for x in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            kap = float(grid[i])
            break
        if vals[i] * vals[i + 1] < 0:
            kap = find_root(
                lambda x: resonance_condition(d, mode, x, a)[0],
                (grid[i], grid[i + 1]),
            )
            break
    else:
        raise BracketError(f"no mode-{mode} resonance found below kappa = 12")
    return ResonanceSpec(
        dimension=d, mode=mode, kappa_star=kap, sigma0=a * (kap / k) ** 2, a=a
    )


def detect_resonances(
    d: int,
    a: float,
    sigma: float,
    k_range: tuple[float, float],
    modes: int,
) -> list[ResonanceSpec]:
    """All resonant frequencies of a homogeneous isotropic interior.

    Scans modes 0..modes over k in k_range and returns one spec per root
    of the modal resonance condition, sorted by frequency then mode.
    """
    if sigma <= 0 or a <= 0:
        raise ValidationError("detect_resonances needs real positive a, sigma")
    lo, hi = float(k_range[0]), float(k_range[1])
    if not 0 < lo < hi:
        raise ValidationError(f"bad k range [{lo}, {hi}]")
    slope = math.sqrt(sigma / a)
    found: list[ResonanceSpec] = []
    npts = max(64, int((hi - lo) * slope / 0.02) + 2)
    grid = np.linspace(lo, hi, min(npts, 60000))
    for n in range(modes + 1):
        vals = [resonance_condition(d, n, k * slope, a)[0] for k in grid]
        for i in range(len(grid) - 1):
            if vals[i] * vals[i + 1] < 0 or vals[i] == 0.0:
                if vals[i] == 0.0:
                    k_root = float(grid[i])
                else:
                    k_root = find_root(
                        lambda k: resonance_condition(d, n, k * slope, a)[0],
                        (float(grid[i]), float(grid[i + 1])),
                    )
                found.append(
                    ResonanceSpec(
                        dimension=d,
                        mode=n,
                        kappa_star=k_root * slope,
                        sigma0=sigma,
                        a=a,
                    )
                )
    found.sort(key=lambda s: (s.frequency, s.mode))
    return found


@dataclass(frozen=True)
class TunedSigma:
    """Detuned interior density defeating the cloak at one epsilon.

    k_eps is the tuned interior Bessel argument; sigma follows in the two
    conventions (the density symbol of the tuning equations reads k_eps / k,
    while the interior equation implies (k_eps / k)^2).  k_eps_lo is a
    double-double correction used by the extended-precision alpha0 path.
    """

    dimension: int
    k: float
    epsilon: float
    variant: str
    k_eps: float
    k_eps_lo: float
    kappa_star: float

    @property
    def k_eps_dd(self) -> tuple[float, float]:
        return (self.k_eps, self.k_eps_lo)

    @property
    def sigma_paper(self) -> float:
        return self.k_eps / self.k

    @property
    def sigma_eq(self) -> float:
        return (self.k_eps / self.k) ** 2

    @property
    def sigma0_paper(self) -> float:
        return self.kappa_star / self.k

    @property
    def sigma0_eq(self) -> float:
        return (self.kappa_star / self.k) ** 2


def _im_denominator(d: int, k: float, eps: float, t: float) -> float:
    ke = k * eps
    reg_e = _regular(d, 0, ke)
    sing_e = _singular(d, 0, ke)
    reg_i = _regular(d, 0, t)
    flux = 1.0 / eps if d == 3 else 1.0
    val = (
        ke * sing_e.derivative * reg_i.value
        - flux * t * sing_e.value * reg_i.derivative
    )
    return val.real


def _paper_mismatch(d: int, k: float, eps: float, t: float) -> float:
    reg = _regular(d, 0, t)
    if d == 3:
        rhs = -eps - k * eps * eps * math.tan(k * eps)
        return (reg.derivative / reg.value).real - rhs
    rhs = 1.0 / math.log(k * eps / 2.0)
    return (t * reg.derivative / reg.value).real - rhs


def _refine_root_mp(d: int, k: float, eps: float, t0: float) -> tuple[float, float]:
    """Polish the exact tuning root in extended precision.

    The root is a simple zero; a few Newton steps from the double root give
    ~40 digits, split into a double-double (hi, lo) pair.
    """
    with _MP_LOCK, mp.workdps(60):
        ke = mp.mpf(k) * mp.mpf(eps)
        if d == 3:
            reg = lambda z: mp.sin(z) / z
            regp = lambda z: mp.cos(z) / z - mp.sin(z) / z**2
            sing = lambda z: -mp.cos(z) / z
            singp = lambda z: mp.sin(z) / z + mp.cos(z) / z**2
            flux = 1 / mp.mpf(eps)
        else:
            reg = lambda z: mp.besselj(0, z)
            regp = lambda z: -mp.besselj(1, z)
            sing = lambda z: mp.bessely(0, z)
            singp = lambda z: -mp.bessely(1, z)
            flux = mp.mpf(1)
        c1 = ke * singp(ke)
        c2 = flux * sing(ke)

        def g(t):
            return c1 * reg(t) - c2 * t * regp(t)

        t = mp.mpf(t0)
        h = mp.mpf(1e-18)
        for _ in range(6):
            dg = (g(t + h) - g(t - h)) / (2 * h)
            t = t - g(t) / dg
        hi = float(t)
        lo = float(t - mp.mpf(hi))
    return hi, lo


def tune_sigma(
    d: int, k: float, eps: float, spec: ResonanceSpec, variant: str = "exact"
) -> TunedSigma:
    """Tune the interior density so the monopole defeats the cloak.

    variant "exact" solves Im(denominator of alpha0) = 0 with the true
    singular functions, which makes alpha0 = -1 identically; "paper" solves
    the leading-order balance instead (small-argument Y_0 without the
    Euler-Mascheroni constant in 2d, and a plain logarithmic-derivative
    match in 3d that omits the k_eps weight of the exact condition), so it
    detunes at the same rate but does not reach alpha0 = -1.
    """
    if variant not in ("exact", "paper"):
        raise ValidationError(f"unknown tuning variant {variant!r}")
    if eps > 0.3:
        raise ValidationError("tuning bracket is only monotone for eps <= 0.3")
    if spec.mode != 0:
        raise UnsupportedConfigurationError("tuning is defined for mode 0")
    kap = spec.kappa_star
    half_width = 0.4
    if variant == "exact":
        fun = lambda t: _im_denominator(d, k, eps, t)
    else:
        fun = lambda t: _paper_mismatch(d, k, eps, t)
    try:
        root = find_root(fun, (kap - half_width, kap + half_width))
    except BracketError as exc:
        raise BracketError(
            f"tuning bracket around kappa* = {kap:.6f} failed: {exc}"
        ) from exc
    lo = 0.0
    if variant == "exact":
        root, lo = _refine_root_mp(d, k, eps, root)
    return TunedSigma(
        dimension=d,
        k=k,
        epsilon=eps,
        variant=variant,
        k_eps=root,
        k_eps_lo=lo,
        kappa_star=kap,
    )


def tuned_inclusion_config(tuned: TunedSigma) -> CloakConfig:
    """Unit-scale cloak config whose interior density realizes the tuning."""
    return CloakConfig(
        dimension=tuned.dimension,
        k=tuned.k,
        epsilon=tuned.epsilon,
        interior=(Layer(1.0, 1.0, tuned.sigma_eq),),
    )


# ---------------------------------------------------------------------------
# interior eigenfunction source


def eigenfunction_normalization(spec: ResonanceSpec) -> float:
    """Amplitude making the resonant radial mode L2-normalized on the ball."""
    d, n, kap = spec.dimension, spec.mode, spec.kappa_star

    def dens(r: np.ndarray) -> np.ndarray:
        vals = np.array([_regular(d, n, kap * ri).value for ri in r])
        return np.abs(vals) ** 2 * r ** (d - 1)

    if d == 3:
        ang = 4.0 * math.pi / (2 * n + 1)
    else:
        ang = 2.0 * math.pi if n == 0 else math.pi
    norm2 = ang * integrate(dens, 0.0, 1.0).real
    return 1.0 / math.sqrt(norm2)


def interior_source_mode_solve(
    medium: LayeredMedium, k: float, spec: ResonanceSpec, normalization: float
) -> ModeSolution:
    """Transmission solve with the normalized eigenfunction as interior source.

    The right-hand side is normalization * e in the (single) inner layer,
    where e is the L2-normalized radial mode of spec, and the incident
    field is zero.  The particular solution comes from the derivative-in-
    wavenumber identity when the source oscillates at the layer wavenumber,
    and from the resolvent quotient otherwise.
    """
    if len(medium.layers) != 1:
        raise UnsupportedConfigurationError(
            "interior source solve implemented for a single interior layer"
        )
    lay = medium.layers[0]
    if abs(lay.radius - 1.0) > 1e-12:
        raise UnsupportedConfigurationError("inner layer radius must be 1")
    d, n = medium.dimension, spec.mode
    kap = medium.wavenumber(k, 0)
    kap_src = complex(spec.kappa_star)
    amp = normalization * eigenfunction_normalization(spec)
    if amp == 0.0:
        part = None
        pv, pd = 0.0 + 0.0j, 0.0 + 0.0j
    else:
        q_src = amp / lay.a
        if abs(kap - kap_src) <= 1e-9 * abs(kap_src):
            part = ParticularTerm(
                kind="kappa_derivative",
                coefficient=-q_src / (2.0 * kap),
                kappa=kap,
                kappa_source=kap_src,
                order=n,
                dimension=d,
            )
        else:
            part = ParticularTerm(
                kind="off_resonance",
                coefficient=q_src / (kap * kap - kap_src * kap_src),
                kappa=kap,
                kappa_source=kap_src,
                order=n,
                dimension=d,
            )
        pv, pd = part.eval(1.0)
    kap_ext = medium.exterior_wavenumber(k)
    reg_i = _regular(d, n, kap)
    out_e = _outgoing(d, n, kap_ext)
    m = np.array(
        [
            [reg_i.value, -out_e.value],
            [lay.a * kap * reg_i.derivative, -medium.exterior_a * kap_ext * out_e.derivative],
        ],
        dtype=complex,
    )
    rhs = np.array([-pv, -lay.a * pd], dtype=complex)
    c, alpha = _solve2x2(m, rhs, f"interior-source mode {n}")
    return ModeSolution(
        n=n,
        b_n=0.0 + 0.0j,
        alpha_n=complex(alpha),
        layer_coeffs=((complex(c), 0.0 + 0.0j),),
        particular=part,
    )
