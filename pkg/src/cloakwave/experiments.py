"""Reproducible experiment drivers over the modal solver.

Each sweep maps a decreasing list of regularization parameters to one
record of norms and fitted quantities.  Rows are independent, may be
computed concurrently, and are always reduced in the given epsilon order,
so outputs are identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateDataError,
    ResonantConfigError,
    SingularSystemError,
    ValidationError,
)
from .fields import (
    FieldSeries,
    IncidentSpec,
    auto_truncation,
    blown_up_interior_series,
    incident_coefficients,
    interior_deviation,
    interior_limit,
    mode_weight,
    norm_annulus,
    outgoing_mode_norm,
    solve_series,
)
from .mie import (
    CloakConfig,
    Layer,
    ModeSolution,
    TunedSigma,
    alpha0_closed_form,
    first_resonance,
    interior_source_mode_solve,
    blown_up_medium,
    resonance_condition,
    tune_sigma,
    tuned_inclusion_config,
    virtual_medium,
)

DEFAULT_PROBE = (2.0, 4.0)
RESONANCE_PROXIMITY = 1e-8


@dataclass(frozen=True)
class SweepRecord:
    """One row of an experiment output."""

    epsilon: float
    visibility_l2: float
    visibility_h1: float
    interior_l2: float
    interior_h1: float
    sigma_eps: float | None = None
    alpha0: complex | None = None
    flags: str = ""


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (log model-variable, log visibility)."""

    slope: float
    intercept: float
    residual: float
    model: str


@dataclass(frozen=True)
class SweepResult:
    records: tuple[SweepRecord, ...]
    fit: RateFit | None
    fit_flag: str = ""


@dataclass(frozen=True)
class InstabilityResult:
    records: tuple[SweepRecord, ...]
    tuned: tuple[TunedSigma, ...]
    reference_norm: float
    products_paper: tuple[float, ...]
    products_eq: tuple[float, ...]


def _map_ordered(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def fit_rate(records, model: str) -> RateFit:
    """Fit log(visibility) against the log of the model variable.

    records is a list of SweepRecord or of (epsilon, visibility) pairs;
    the model variable is epsilon ("log_eps") or 1/|ln eps|
    ("log_inv_ln_eps").  The residual is the maximum absolute deviation in
    log-log coordinates.
    """
    if model not in ("log_eps", "log_inv_ln_eps"):
        raise ValidationError(f"unknown rate model {model!r}")
    pts = []
    for rec in records:
        if isinstance(rec, SweepRecord):
            pts.append((rec.epsilon, rec.visibility_l2))
        else:
            e, v = rec
            pts.append((float(e), float(v)))
    if len(pts) < 3:
        raise ValidationError("rate fit needs at least 3 records")
    eps = np.array([p[0] for p in pts])
    vis = np.array([p[1] for p in pts])
    if np.any(vis <= 0):
        raise ValidationError("rate fit needs positive visibilities")
    if np.max(vis) / np.min(vis) < 10.0:
        raise DegenerateDataError(
            f"visibilities span {np.max(vis) / np.min(vis):.3g}x, "
            "less than one decade"
        )
    if model == "log_eps":
        x = np.log(eps)
    else:
        x = np.log(1.0 / np.abs(np.log(eps)))
    y = np.log(vis)
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, y, rcond=None)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return RateFit(float(slope), float(intercept), residual, model)


def _check_eps_list(eps_list) -> list[float]:
    eps = [float(e) for e in eps_list]
    if len(eps) < 3:
        raise ValidationError("sweep needs at least 3 epsilon values")
    if any(not 0.0 < e <= 1.0 for e in eps):
        raise ValidationError("epsilon values must lie in (0, 1]")
    if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
        raise ValidationError("epsilon list must be strictly decreasing")
    return eps


def _homogeneous_interior(config: CloakConfig) -> Layer | None:
    if len(config.interior) == 1 and complex(config.interior[0].sigma).imag == 0:
        return config.interior[0]
    return None


def min_resonance_margin(config: CloakConfig, modes: int) -> float:
    """Smallest normalized resonance-condition magnitude at the config's k."""
    lay = _homogeneous_interior(config)
    if lay is None:
        raise ValidationError("resonance margin defined for homogeneous interiors")
    kappa = config.k * math.sqrt(complex(lay.sigma).real / lay.a)
    return min(
        abs(resonance_condition(config.dimension, n, kappa, lay.a)[1])
        for n in range(modes + 1)
    )


def _free_value_at_origin(b: np.ndarray) -> complex:
    # only the monopole regular basis is nonzero at the center
    return complex(b[0])


def convergence_sweep(
    config: CloakConfig,
    eps_list,
    *,
    probe: tuple[float, float] = DEFAULT_PROBE,
    truncation: int | None = None,
    threads: int = 1,
    allow_resonant: bool = False,
) -> SweepResult:
    """Visibility and interior-limit deviation across a regularization sweep.

    Per epsilon: the virtual small-inclusion problem is solved at the
    config's frequency, the visibility is the norm of (field - free-field
    pullback) over the probe annulus, and the interior deviation is
    measured against the closed-form interior limit.  The rate fit uses
    epsilon in 3d and 1/|ln eps| in 2d; a fit on data spanning less than a
    decade is reported as degenerate instead of failing the sweep.
    """
    eps = _check_eps_list(eps_list)
    d, k = config.dimension, config.k
    if config.incident is None:
        raise ValidationError("convergence sweep needs an incident field")
    spec = config.incident
    if _homogeneous_interior(config) is not None:
        margin = min_resonance_margin(config, auto_truncation(spec, k, d))
        if margin < RESONANCE_PROXIMITY and not allow_resonant:
            raise ResonantConfigError(
                f"configuration is resonant (margin {margin:.3e}); use the "
                "resonance experiments or pass allow_resonant"
            )
    n_max = truncation if truncation is not None else auto_truncation(spec, k, d)
    b = incident_coefficients(spec, k, n_max, d)
    u0 = _free_value_at_origin(b)
    limit = interior_limit(d, config, u0) if _homogeneous_interior(config) else None

    def one(e: float) -> SweepRecord:
        cfg = replace(config, epsilon=e)
        try:
            vm = virtual_medium(cfg)
            series = solve_series(vm, k, b, axis=None if spec.axis is None else tuple(spec.axis))
            ref = (b, k)
            vis_l2 = norm_annulus(series, "diff_vs_reference", probe[0], probe[1], reference=ref)
            vis_h1 = norm_annulus(
                series, "diff_vs_reference", probe[0], probe[1], reference=ref, norm="h1"
            )
            interior = blown_up_interior_series(cfg, series)
            int_l2 = interior_deviation(interior, limit)
            int_h1 = interior_deviation(interior, limit, norm="h1")
        except SingularSystemError as exc:
            return SweepRecord(
                e, math.nan, math.nan, math.nan, math.nan, flags=f"singular: {exc}"
            )
        return SweepRecord(e, vis_l2, vis_h1, int_l2, int_h1)

    records = tuple(_map_ordered(one, eps, threads))
    clean = [r for r in records if not r.flags]
    model = "log_eps" if d == 3 else "log_inv_ln_eps"
    try:
        if len(clean) < 3:
            raise DegenerateDataError("fewer than 3 non-singular rows")
        fit = fit_rate(clean, model)
        flag = ""
    except (DegenerateDataError, ValidationError) as exc:
        fit, flag = None, f"degenerate_fit: {exc}"
    return SweepResult(records, fit, flag)


def shell_probe_visibility(
    config: CloakConfig,
    r_in: float,
    r_out: float,
    truncation: int | None = None,
) -> float:
    """L2 visibility over an annulus inside the cloak shell (1 < r < 2).

    Lower precision than the exterior probe: the physical-domain series is
    composed with the inverse map and compared against the pullback of the
    free field through the limit map.
    """
    if not 1.0 < r_in < r_out < 2.0:
        raise ValidationError("shell probe must lie strictly inside (1, 2)")
    d, k = config.dimension, config.k
    spec = config.incident
    n_max = truncation if truncation is not None else auto_truncation(spec, k, d)
    b = incident_coefficients(spec, k, n_max, d)
    vm = virtual_medium(config)
    series = solve_series(
        vm, k, b, domain="physical", epsilon=config.epsilon,
        axis=None if spec.axis is None else tuple(spec.axis),
    )
    return norm_annulus(series, "diff_vs_reference", r_in, r_out, reference=(b, k))


def instability_sweep(
    d: int,
    k: float,
    eps_list,
    *,
    variant: str = "exact",
    control_sigma: float | None = None,
    probe: tuple[float, float] = DEFAULT_PROBE,
    threads: int = 1,
) -> InstabilityResult:
    """Detuned-density sweep showing order-one visibility at vanishing eps.

    For each epsilon the interior density is tuned near the first monopole
    resonance so the scattering coefficient is driven to -1; the record
    reports the tuned density (tuning-equation convention), the closed-form
    alpha0 and the scattered norm over the probe annulus, which the tuned
    rows compare against the unit-coefficient outgoing norm.  Passing
    control_sigma fixes the interior density instead (control arm, no
    tuning), which must reproduce convergence_sweep exactly.
    """
    eps = _check_eps_list(eps_list)
    spec0 = first_resonance(d, k, 0)
    ref_norm = outgoing_mode_norm(d, k, 0, probe[0], probe[1])
    mode_inc = IncidentSpec("mode", mode=0)
    b = incident_coefficients(mode_inc, k, auto_truncation(mode_inc, k, d), d)

    def one(e: float) -> tuple[SweepRecord, TunedSigma | None]:
        try:
            if control_sigma is not None:
                cfg = CloakConfig(d, k, e, (Layer(1.0, 1.0, control_sigma),))
                tuned = None
                alpha = None
                sig = control_sigma
            else:
                tuned = tune_sigma(d, k, e, spec0, variant)
                cfg = tuned_inclusion_config(tuned)
                k_eps = tuned.k_eps_dd if variant == "exact" else tuned.k_eps
                alpha = alpha0_closed_form(d, k, e, k_eps)
                sig = tuned.sigma_paper
            vm = virtual_medium(cfg)
            series = solve_series(vm, k, b)
            vis_l2 = norm_annulus(series, "scattered", probe[0], probe[1])
            vis_h1 = norm_annulus(series, "scattered", probe[0], probe[1], norm="h1")
            interior = blown_up_interior_series(cfg, series)
            int_l2 = interior_deviation(interior, None)
            int_h1 = interior_deviation(interior, None, norm="h1")
        except SingularSystemError as exc:
            rec = SweepRecord(
                e, math.nan, math.nan, math.nan, math.nan, flags=f"singular: {exc}"
            )
            return rec, None
        rec = SweepRecord(
            e, vis_l2, vis_h1, int_l2, int_h1,
            sigma_eps=sig, alpha0=alpha,
            flags="control" if control_sigma is not None else "",
        )
        return rec, tuned

    rows = _map_ordered(one, eps, threads)
    records = tuple(r for r, _ in rows)
    tuned = tuple(t for _, t in rows if t is not None)
    products_paper = []
    products_eq = []
    for rec, t in rows:
        if t is None:
            continue
        weight = (1.0 / rec.epsilon) if d == 3 else abs(math.log(rec.epsilon))
        products_paper.append(weight * abs(t.sigma_paper - t.sigma0_paper))
        products_eq.append(weight * abs(t.sigma_eq - t.sigma0_eq))
    return InstabilityResult(
        records, tuned, ref_norm, tuple(products_paper), tuple(products_eq)
    )


def _zero_mode(n: int, nlayers: int) -> ModeSolution:
    return ModeSolution(
        n=n, b_n=0.0 + 0.0j, alpha_n=0.0 + 0.0j,
        layer_coeffs=tuple((0.0 + 0.0j, 0.0 + 0.0j) for _ in range(nlayers)),
    )


def blowup_sweep(
    d: int,
    k: float,
    eps_list,
    *,
    mode: int = 0,
    amplitude: float = 1.0,
    probe: tuple[float, float] = DEFAULT_PROBE,
    threads: int = 1,
) -> tuple[SweepRecord, ...]:
    """Interior energy blow-up under a resonant eigenfunction source.

    The interior is the first mode-`mode` resonant density at frequency k,
    driven by the L2-normalized radial eigenfunction; per epsilon the
    record carries the interior L2/H1 norms of the blown-up field and the
    exterior L2 norm over the probe annulus (visibility columns).  Singular
    rows are flagged and the sweep continues.
    """
    eps = _check_eps_list(eps_list)
    spec = first_resonance(d, k, mode)
    interior_layer = Layer(1.0, 1.0, spec.sigma0)

    def one(e: float) -> SweepRecord:
        cfg = CloakConfig(d, k, e, (interior_layer,))
        med = blown_up_medium(cfg)
        try:
            sol = interior_source_mode_solve(
                med, k, spec, normalization=amplitude * e ** (2 - d)
            )
        except SingularSystemError as exc:
            return SweepRecord(
                e, math.nan, math.nan, math.nan, math.nan, flags=f"singular: {exc}"
            )
        modes = tuple(_zero_mode(n, 1) for n in range(mode)) + (sol,)
        series = FieldSeries(
            dimension=d, k=k, truncation=mode, modes=modes, medium=med
        )
        int_l2 = interior_deviation(series, None)
        int_h1 = interior_deviation(series, None, norm="h1")
        # u_c(x) = U(x / eps) = alpha * outgoing(k |x|) on the probe annulus
        amp_out = abs(sol.alpha_n)
        ext_l2 = amp_out * outgoing_mode_norm(d, k, mode, probe[0], probe[1])
        ext_h1 = amp_out * outgoing_mode_norm(d, k, mode, probe[0], probe[1], norm="h1")
        return SweepRecord(e, ext_l2, ext_h1, int_l2, int_h1)

    return tuple(_map_ordered(one, eps, threads))


def nonresonance_scan(
    d: int, a: float, sigma: float, k_grid, modes: int
) -> float:
    """Minimum normalized resonance-condition magnitude over a k grid.

    A positive minimum certifies non-resonance on the grid; an empty grid
    returns the +inf sentinel.
    """
    ks = [float(k) for k in k_grid]
    if not ks:
        return math.inf
    if any(k <= 0 for k in ks):
        raise ValidationError("k grid must be positive")
    slope = math.sqrt(sigma / a)
    return min(
        abs(resonance_condition(d, n, k * slope, a)[1])
        for k in ks
        for n in range(modes + 1)
    )
