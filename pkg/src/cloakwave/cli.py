"""Command-line front end: config parsing, experiment dispatch, file output.

Configs are plain key = value text (comments with '#', dotted keys for
grouping); results go to a CSV with a fixed column order plus a JSON
summary that echoes the parsed config, so runs are reproducible and
diff-friendly.  Exit codes: 0 success, 2 validation error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import CloakwaveError, ValidationError
from .experiments import (
    blowup_sweep,
    convergence_sweep,
    instability_sweep,
    nonresonance_scan,
)
from .fields import (
    IncidentSpec,
    auto_truncation,
    incident_coefficients,
    solve_series,
)
from .mie import CloakConfig, Layer, detect_resonances, mode_solve, virtual_medium

CSV_HEADER = (
    "epsilon,visibility_l2,visibility_h1,interior_l2,interior_h1,"
    "sigma_eps,alpha0_re,alpha0_im,flags"
)

EXPERIMENTS = ("sweep", "instability", "blowup", "resonances", "scan-k", "field", "modes")

GRID_POINT_CAP = 1_000_000
GRID_RADIUS_CAP = 5.0


def golden_tolerance() -> float:
    """Relative tolerance for golden-file comparison (env-overridable)."""
    raw = os.environ.get("CLOAKWAVE_SEED_TOL", "")
    return float(raw) if raw else 1e-9


# ---------------------------------------------------------------------------
# config


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration plus the raw key/value echo."""

    experiment: str
    cloak: CloakConfig
    eps_list: tuple[float, ...]
    probe: tuple[float, float]
    truncation: int | None
    tuning: str
    threads: int
    blowup_mode: int
    scan_k: tuple[float, float, int, int]        # k_min, k_max, points, modes
    resonance_window: tuple[float, float, int]   # k_min, k_max, modes
    grid_extent: float
    grid_points: int
    field_kind: str = "incident"
    raw: tuple[tuple[str, str], ...] = field(default_factory=tuple)


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"config line {lineno}: expected 'key = value'")
        key, val = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ValidationError(f"config line {lineno}: empty key")
        if key in out:
            raise ValidationError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = val.strip()
    return out


def _floats(raw: str) -> list[float]:
    return [float(tok) for tok in raw.replace(",", " ").split()]


def _complexes(raw: str) -> list[complex]:
    return [complex(tok) for tok in raw.replace(",", " ").split()]


def build_run_config(kv: dict[str, str]) -> RunConfig:
    """Validate a raw key/value mapping into a RunConfig."""
    def get(key: str, default: str | None = None) -> str:
        if key in kv:
            return kv[key]
        if default is None:
            raise ValidationError(f"missing required config key {key!r}")
        return default

    experiment = get("experiment")
    if experiment not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment {experiment!r}")
    try:
        dimension = int(get("dimension"))
        k = float(get("k"))
        epsilon = float(get("epsilon", "0.1"))
        radii = _floats(get("interior.radii", "1.0"))
        avals = _floats(get("interior.a", "1.0"))
        svals = _complexes(get("interior.sigma", "1.0"))
        eps_list = tuple(_floats(get("eps_list", "1e-1, 3e-2, 1e-2, 3e-3, 1e-3")))
        probe_in = float(get("probe.r_in", "2.0"))
        probe_out = float(get("probe.r_out", "4.0"))
        truncation = int(get("truncation", "0")) or None
        tuning = get("tuning", "exact")
        threads = int(get("threads", "1"))
        blowup_mode = int(get("blowup.mode", "0"))
        scan_k = (
            float(get("scan.k_min", "0.01")),
            float(get("scan.k_max", "1.0")),
            int(get("scan.points", "100")),
            int(get("scan.modes", "10")),
        )
        resonance_window = (
            float(get("resonances.k_min", "0.1")),
            float(get("resonances.k_max", "6.0")),
            int(get("resonances.modes", "3")),
        )
        grid_extent = float(get("grid.extent", "3.0"))
        grid_points = int(get("grid.points", "41"))
        amplitude = complex(get("incident.amplitude", "1.0"))
    except ValueError as exc:
        raise ValidationError(f"malformed numeric value in config: {exc}") from exc
    field_kind = get("field.kind", "incident")
    if field_kind not in ("incident", "eigenmode"):
        raise ValidationError(f"unknown field kind {field_kind!r}")
    if tuning not in ("paper", "exact"):
        raise ValidationError(f"unknown tuning variant {tuning!r}")
    if threads < 1:
        raise ValidationError("threads must be >= 1")
    if len({len(radii), len(avals), len(svals)}) != 1:
        raise ValidationError("interior.radii/a/sigma must have equal lengths")
    layers = tuple(Layer(r, a, s) for r, a, s in zip(radii, avals, svals))
    kind = get("incident.kind", "plane_wave")
    if kind == "plane_wave":
        direction = tuple(_floats(get("incident.direction", "1, 0, 0")))[:dimension]
        incident = IncidentSpec("plane_wave", amplitude, direction=direction)
    elif kind == "point_source":
        location = tuple(_floats(get("incident.location")))[:dimension]
        incident = IncidentSpec("point_source", amplitude, location=location)
    elif kind == "mode":
        incident = IncidentSpec("mode", amplitude, mode=int(get("incident.mode", "0")))
    else:
        raise ValidationError(f"unknown incident kind {kind!r}")
    cloak = CloakConfig(dimension, k, epsilon, layers, incident)
    raw = tuple(sorted(kv.items()))
    return RunConfig(
        experiment=experiment,
        cloak=cloak,
        eps_list=eps_list,
        probe=(probe_in, probe_out),
        truncation=truncation,
        tuning=tuning,
        threads=threads,
        blowup_mode=blowup_mode,
        scan_k=scan_k,
        resonance_window=resonance_window,
        grid_extent=grid_extent,
        grid_points=grid_points,
        field_kind=field_kind,
        raw=raw,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    return build_run_config(parse_config_text(text))


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def records_csv(records) -> str:
    lines = [CSV_HEADER]
    for r in records:
        a_re = None if r.alpha0 is None else r.alpha0.real
        a_im = None if r.alpha0 is None else r.alpha0.imag
        lines.append(
            ",".join(
                [
                    _fmt(r.epsilon),
                    _fmt(r.visibility_l2),
                    _fmt(r.visibility_h1),
                    _fmt(r.interior_l2),
                    _fmt(r.interior_h1),
                    _fmt(r.sigma_eps),
                    _fmt(a_re),
                    _fmt(a_im),
                    r.flags,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _write(path: str, content: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)


def _summary(config: RunConfig, extra: dict) -> str:
    body = {
        "tool": {"name": "cloakwave", "version": __version__},
        "experiment": config.experiment,
        "config": {k: v for k, v in config.raw},
    }
    body.update(extra)
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def _ratefit_json(fit) -> dict | None:
    if fit is None:
        return None
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "model": fit.model,
    }


# ---------------------------------------------------------------------------
# experiment runners


def _run_sweep(config: RunConfig, out_dir: str) -> None:
    res = convergence_sweep(
        config.cloak,
        config.eps_list,
        probe=config.probe,
        truncation=config.truncation,
        threads=config.threads,
    )
    _write(os.path.join(out_dir, "results.csv"), records_csv(res.records))
    _write(
        os.path.join(out_dir, "summary.json"),
        _summary(
            config,
            {
                "rows": len(res.records),
                "rate_fit": _ratefit_json(res.fit),
                "fit_flag": res.fit_flag,
            },
        ),
    )


def _run_instability(config: RunConfig, out_dir: str) -> None:
    res = instability_sweep(
        config.cloak.dimension,
        config.cloak.k,
        config.eps_list,
        variant=config.tuning,
        probe=config.probe,
        threads=config.threads,
    )
    _write(os.path.join(out_dir, "results.csv"), records_csv(res.records))
    extra = {
        "rows": len(res.records),
        "tuning_variant": config.tuning,
        "reference_norm": res.reference_norm,
        "alpha0_re": [r.alpha0.real for r in res.records],
        "alpha0_im": [r.alpha0.imag for r in res.records],
        "detuning_products_paper": list(res.products_paper),
        "detuning_products_eq": list(res.products_eq),
        "sigma0_paper": res.tuned[0].sigma0_paper if res.tuned else None,
        "sigma0_eq": res.tuned[0].sigma0_eq if res.tuned else None,
    }
    _write(os.path.join(out_dir, "summary.json"), _summary(config, extra))


def _run_blowup(config: RunConfig, out_dir: str) -> None:
    records = blowup_sweep(
        config.cloak.dimension,
        config.cloak.k,
        config.eps_list,
        mode=config.blowup_mode,
        probe=config.probe,
        threads=config.threads,
    )
    _write(os.path.join(out_dir, "results.csv"), records_csv(records))
    prods = [
        r.epsilon * r.interior_h1 if config.cloak.dimension == 3 else r.interior_h1
        for r in records
    ]
    _write(
        os.path.join(out_dir, "summary.json"),
        _summary(
            config,
            {
                "rows": len(records),
                "blowup_mode": config.blowup_mode,
                "interior_products": prods,
                "exterior_l2": [r.visibility_l2 for r in records],
            },
        ),
    )


def _run_resonances(config: RunConfig, out_dir: str) -> None:
    k_min, k_max, modes = config.resonance_window
    lay = config.cloak.interior[0]
    if len(config.cloak.interior) != 1 or complex(lay.sigma).imag != 0:
        raise ValidationError("resonance detection needs a homogeneous lossless interior")
    found = detect_resonances(
        config.cloak.dimension, lay.a, complex(lay.sigma).real, (k_min, k_max), modes
    )
    rows = [
        {
            "mode": s.mode,
            "k": s.frequency,
            "kappa_star": s.kappa_star,
            "sigma0": s.sigma0,
        }
        for s in found
    ]
    _write(
        os.path.join(out_dir, "summary.json"),
        _summary(config, {"resonances": rows, "count": len(rows)}),
    )


def _run_scan(config: RunConfig, out_dir: str) -> None:
    k_min, k_max, points, modes = config.scan_k
    lay = config.cloak.interior[0]
    grid = np.linspace(k_min, k_max, points)
    minimum = nonresonance_scan(
        config.cloak.dimension, lay.a, complex(lay.sigma).real, grid, modes
    )
    _write(
        os.path.join(out_dir, "summary.json"),
        _summary(
            config,
            {
                "minimum": minimum if math.isfinite(minimum) else "inf",
                "k_min": k_min,
                "k_max": k_max,
                "points": points,
                "modes": modes,
            },
        ),
    )


def _grid_points(config: RunConfig) -> np.ndarray:
    ext = config.grid_extent
    n = config.grid_points
    if ext <= 0 or ext * math.sqrt(2.0) > GRID_RADIUS_CAP:
        raise ValidationError(
            f"grid corners must stay inside radius {GRID_RADIUS_CAP} "
            f"(extent <= {GRID_RADIUS_CAP / math.sqrt(2.0):.4f})"
        )
    d = config.cloak.dimension
    count = n * n
    if count > GRID_POINT_CAP:
        raise ValidationError(f"grid of {count} points exceeds cap {GRID_POINT_CAP}")
    axis_pts = np.linspace(-ext, ext, n)
    pts = []
    for x2 in axis_pts:
        for x1 in axis_pts:
            if d == 2:
                pts.append((x1, x2))
            else:
                # plane containing the symmetry axis (y = 0)
                pts.append((x1, 0.0, x2))
    return np.array(pts)


def _field_evaluator(config: RunConfig):
    """(callable point -> value, truncation) for the configured field kind."""
    cloak = config.cloak
    d, k, eps = cloak.dimension, cloak.k, cloak.epsilon
    corner = config.grid_extent * math.sqrt(2.0)
    if config.field_kind == "eigenmode":
        from .experiments import _zero_mode
        from .fields import FieldSeries
        from .mie import blown_up_medium, first_resonance, interior_source_mode_solve
        from .transform import BlowupMap, map_inverse

        spec = first_resonance(d, k, config.blowup_mode)
        cfg = CloakConfig(d, k, eps, (Layer(1.0, 1.0, spec.sigma0),))
        med = blown_up_medium(cfg)
        sol = interior_source_mode_solve(med, k, spec, normalization=eps ** (2 - d))
        modes = tuple(_zero_mode(n, 1) for n in range(config.blowup_mode)) + (sol,)
        series = FieldSeries(
            dimension=d, k=k, truncation=config.blowup_mode, modes=modes, medium=med
        )
        m = BlowupMap(eps, d)

        def value(p: np.ndarray) -> complex:
            # u_c(y) = U(F^{-1}(y) / eps): blown-up field at the rescaled preimage
            return series.eval(map_inverse(m, p) / eps)

        return value, config.blowup_mode
    spec = cloak.incident
    if spec.kind == "point_source":
        r0 = float(np.linalg.norm(spec.location))
        if corner >= 0.9 * r0:
            raise ValidationError(
                f"field grid corner radius {corner:.3g} reaches the point-source "
                f"expansion boundary (source radius {r0:.3g})"
            )
    n_max = config.truncation or auto_truncation(spec, k, d, r_eval=corner)
    b = incident_coefficients(spec, k, n_max, d, r_eval=corner)
    series = solve_series(
        virtual_medium(cloak),
        k,
        b,
        domain="physical",
        epsilon=eps,
        axis=None if spec.axis is None else tuple(spec.axis),
    )
    return series.eval, n_max


def _run_field(config: RunConfig, out_dir: str) -> None:
    value, n_max = _field_evaluator(config)
    pts = _grid_points(config)
    d = config.cloak.dimension
    header = "x,y,re_u,im_u,abs_u" if d == 2 else "x,y,z,re_u,im_u,abs_u"
    lines = [header]
    for p in pts:
        try:
            val = value(p)
        except CloakwaveError:
            # interface or map-branch hit: nudge deterministically outward
            val = value(np.asarray(p) * (1.0 + 1e-9))
        coords = ",".join(_fmt(c) for c in p)
        lines.append(f"{coords},{_fmt(val.real)},{_fmt(val.imag)},{_fmt(abs(val))}")
    _write(os.path.join(out_dir, "field.csv"), "\n".join(lines) + "\n")
    _write(
        os.path.join(out_dir, "summary.json"),
        _summary(
            config,
            {
                "points": len(pts),
                "extent": config.grid_extent,
                "truncation": n_max,
                "field_kind": config.field_kind,
            },
        ),
    )


def _run_modes(config: RunConfig, out_dir: str) -> None:
    cloak = config.cloak
    spec = cloak.incident
    n_max = config.truncation or auto_truncation(spec, cloak.k, cloak.dimension)
    b = incident_coefficients(spec, cloak.k, n_max, cloak.dimension)
    medium = virtual_medium(cloak)
    lines = ["n,b_re,b_im,alpha_re,alpha_im,inner_c_re,inner_c_im"]
    for n in range(n_max + 1):
        sol = mode_solve(medium, cloak.k, n, b[n])
        c0 = sol.layer_coeffs[0][0]
        lines.append(
            f"{n},{_fmt(sol.b_n.real)},{_fmt(sol.b_n.imag)},"
            f"{_fmt(sol.alpha_n.real)},{_fmt(sol.alpha_n.imag)},"
            f"{_fmt(c0.real)},{_fmt(c0.imag)}"
        )
    _write(os.path.join(out_dir, "modes.csv"), "\n".join(lines) + "\n")
    _write(
        os.path.join(out_dir, "summary.json"),
        _summary(config, {"rows": n_max + 1, "truncation": n_max}),
    )


_RUNNERS = {
    "sweep": _run_sweep,
    "instability": _run_instability,
    "blowup": _run_blowup,
    "resonances": _run_resonances,
    "scan-k": _run_scan,
    "field": _run_field,
    "modes": _run_modes,
}


def run(
    config_path: str,
    out_dir: str = ".",
    *,
    experiment: str | None = None,
    threads: int | None = None,
    truncation: int | None = None,
    tuning: str | None = None,
) -> int:
    """Load a config, run its experiment, write results; returns exit status."""
    try:
        config = load_config(config_path)
        if experiment is not None and experiment != config.experiment:
            raise ValidationError(
                f"subcommand {experiment!r} does not match config experiment "
                f"{config.experiment!r}"
            )
        if threads is not None:
            config = _override(config, threads=threads)
        if truncation is not None:
            config = _override(config, truncation=truncation)
        if tuning is not None:
            if tuning not in ("paper", "exact"):
                raise ValidationError(f"unknown tuning variant {tuning!r}")
            config = _override(config, tuning=tuning)
    except ValidationError as exc:
        print(f"cloakwave: config error: {exc}", file=sys.stderr)
        return 2
    try:
        os.makedirs(out_dir, exist_ok=True)
        _RUNNERS[config.experiment](config, out_dir)
    except ValidationError as exc:
        print(f"cloakwave: validation error: {exc}", file=sys.stderr)
        return 2
    except CloakwaveError as exc:
        print(f"cloakwave: numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


def _override(config: RunConfig, **kw) -> RunConfig:
    from dataclasses import replace

    return replace(config, **kw)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cloakwave",
        description="Modal simulator for transformation-based approximate cloaking",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="path to key = value config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--truncation", type=int, default=None)
        p.add_argument("--tuning", choices=["paper", "exact"], default=None)
    args = parser.parse_args(argv)
    return run(
        args.config,
        args.out,
        experiment=args.command,
        threads=args.threads,
        truncation=args.truncation,
        tuning=args.tuning,
    )


if __name__ == "__main__":
    raise SystemExit(main())
