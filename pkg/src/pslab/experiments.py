"""Batch experiments behind the CLI: each builds one CSV from one config."""

from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, ExperimentConfig
from .corpus import hermite_functions, two_bump
from .fock import lattice_sweep, save_sweep_csv
from .frames import (
    FunctionSystem,
    commutation_ledger,
    dual_system,
    frame_bounds,
    gramian,
    localization_fit,
    save_ledger_csv,
)
from .geometry import PhasePointSet, density_trend
from .grid import GridSpec, PhasePoint, SampledFunction, gaussian_window, snap_to_grid, tf_shift
from .localization import moment
from .operators import RestrictionOperator, RestrictionSpec, improve_system, plunge_count

_RECIPE = re.compile(r"^([a-z-]+)\(([^)]*)\)$|^([a-z-]+)$")


def corpus(recipe: str, grid: GridSpec, seed: int = 0) -> FunctionSystem:
    """Deterministic function system from a recipe string.

    Recipes: hermite-onb(M), gabor-gaussian(alpha, beta[, window]),
    jittered-gabor(alpha, beta, jitter[, window]), two-bump[(separation)].
    """
    match = _RECIPE.match(recipe.strip())
    if not match:
        raise ValueError(f"unparseable recipe {recipe!r}")
    name = match.group(1) or match.group(3)
    args = [float(tok) for tok in match.group(2).split(",") if tok.strip()] if match.group(2) else []
    origin = PhasePoint((0.0,) * grid.dim, (0.0,) * grid.dim)
    if name == "hermite-onb":
        count = int(args[0]) if args else 16
        members = hermite_functions(grid, count)
        return FunctionSystem(members, [origin] * count, f"hermite-onb({count})")
    if name in ("gabor-gaussian", "jittered-gabor"):
        jittered = name == "jittered-gabor"
        expected = 3 if jittered else 2
        if len(args) < expected or len(args) > expected + 1:
            raise ValueError(f"recipe {name} takes {expected} or {expected + 1} arguments")
        alpha, beta = args[0], args[1]
        jitter = args[2] if jittered else 0.0
        window = args[expected] if len(args) > expected else 4.0
        if alpha <= 0 or beta <= 0 or jitter < 0 or window <= 0:
            raise ValueError(f"bad lattice parameters in recipe {recipe!r}")
        rng = np.random.default_rng(seed)
        g = gaussian_window(grid)
        members, centers = [], []
        for m in range(-int(window / alpha), int(window / alpha) + 1):
            for n in range(-int(window / beta), int(window / beta) + 1):
                a, b = alpha * m, beta * n
                if jittered:
                    a, b = a + rng.uniform(-jitter, jitter), b + rng.uniform(-jitter, jitter)
                point = snap_to_grid(grid, PhasePoint((a,) * grid.dim, (b,) * grid.dim))
                centers.append(point)
                members.append(tf_shift(g, point))
        return FunctionSystem(members, centers, recipe.strip())
    if name == "two-bump":
        separation = args[0] if args else 3.0
        return FunctionSystem([two_bump(grid, separation)], [origin], "two-bump")
    raise ValueError(f"unknown recipe {name!r}")


def _provenance(cfg: ExperimentConfig) -> list[str]:
    return [
        f"experiment {cfg.experiment}",
        f"config sha256 {cfg.sha256}",
        f"seed {cfg.seed}",
        f"pslab {__version__} numpy {np.__version__} scipy {scipy.__version__}",
    ]


def _write_csv(path: Path, header: str, rows: list[str], comments: list[str]) -> None:
    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "w") as fh:
            fh.write("\n".join([f"# {c}" for c in comments] + [header] + rows) + "\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _tight_central_member(system: FunctionSystem) -> SampledFunction:
    """Central member of the orthonormalized system, by one Gram column.

    Matches canonical_tight member-for-member on well-conditioned systems
    but only materializes the member whose center is closest to the origin,
    so large systems never allocate a second member matrix.  Where
    canonical_tight refuses a badly conditioned span, this caps the
    pseudo-inverse at 1e10 instead: a redundant lattice truncates to a
    rank-deficient Gramian whose weakest retained directions are edge
    artifacts, and dropping them perturbs the central member at the same
    order as the cap.
    """
    G = gramian(system)
    w, U = np.linalg.eigh(G)
    tol = w[-1] * len(system) * np.finfo(float).eps
    kept = w > max(tol, w[-1] * 1e-10)
    if not kept.any():
        raise ValueError("Gramian is numerically zero; nothing to orthonormalize")
    scale = np.zeros_like(w)
    scale[kept] = w[kept] ** -0.5
    central = int(np.argmin([sum(v * v for v in c.a + c.b) for c in system.centers]))
    row = (U[central, :] * scale) @ np.conj(U).T
    values = np.conj(row) @ system.member_matrix()
    return SampledFunction(system.grid, values.reshape(system.grid.shape))


def _run_balian_low(cfg: ExperimentConfig, out: Path) -> list[Path]:
    grid = cfg.grid()
    if grid.dim != 1:
        raise ConfigError("[balian-low] runs on one-dimensional grids")
    alpha = cfg.get_float("alpha", 1.0)
    beta = cfg.get_float("beta", 1.0)
    windows = [int(w) for w in cfg.get_floats("windows")]
    if any(w <= 0 for w in windows) or any(b <= a for a, b in zip(windows, windows[1:])):
        raise ConfigError("[balian-low] windows must be increasing positive integers")
    dual = grid.dual()
    if abs(alpha / grid.step[0] - round(alpha / grid.step[0])) > 1e-9 or abs(
        beta / dual.step[0] - round(beta / dual.step[0])
    ) > 1e-9:
        raise ConfigError(f"[balian-low] spacings ({alpha}, {beta}) are not grid-aligned")
    if alpha * windows[-1] >= grid.half_extent() or beta * windows[-1] >= dual.half_extent():
        raise ConfigError(
            f"[balian-low] window {windows[-1]} puts lattice shifts outside the "
            f"grid box (half-extents {grid.half_extent()}, {dual.half_extent()})"
        )
    g = gaussian_window(grid)
    rows = []
    for T in windows:
        centers = [
            PhasePoint((alpha * m,), (beta * n,))
            for m in range(-T, T + 1)
            for n in range(-T, T + 1)
        ]
        members = [tf_shift(g, c) for c in centers]
        system = FunctionSystem(members, centers, f"gabor({alpha},{beta})@{T}")
        phi = _tight_central_member(system)
        value = moment(phi, 0.0, 1.0, side="frequency")
        rows.append(f"{T},{len(system)},{value!r}")
        del members, system
    path = out / "balian_low.csv"
    _write_csv(path, "window,members,frequency_moment", rows, _provenance(cfg))
    return [path]


def _run_trace_check(cfg: ExperimentConfig, out: Path) -> list[Path]:
    grid = cfg.grid()
    if grid.dim != 1:
        raise ConfigError("[trace-check] dense traces run on one-dimensional grids")
    pairs = []
    for token in cfg.get_str("pairs").split():
        try:
            ht, hf = (float(v) for v in token.split(","))
        except ValueError:
            raise ConfigError(f"[trace-check] bad pair {token!r}, expected time,freq") from None
        pairs.append((ht, hf))
    try:
        specs = [RestrictionSpec(grid, ht, hf) for ht, hf in pairs]
    except ValueError as exc:
        raise ConfigError(f"[trace-check] {exc}") from None
    rows = []
    for spec in specs:
        tr = RestrictionOperator(spec).trace()
        area = (2 * spec.time_halfwidth) ** grid.dim * (2 * spec.freq_halfwidth) ** grid.dim
        rows.append(
            f"{spec.time_halfwidth!r},{spec.freq_halfwidth!r},{tr!r},{area!r},"
            f"{abs(tr - area) / area!r}"
        )
    path = out / "trace_check.csv"
    _write_csv(path, "time_halfwidth,freq_halfwidth,trace,area,rel_error", rows, _provenance(cfg))
    return [path]


def _run_plunge_count(cfg: ExperimentConfig, out: Path) -> list[Path]:
    grid = cfg.grid()
    if grid.dim != 1:
        raise ConfigError("[plunge-count] dense spectra run on one-dimensional grids")
    radii = cfg.get_floats("radii")
    try:
        specs = [RestrictionSpec(grid, R / 2, R / 2) for R in radii]
    except ValueError as exc:
        raise ConfigError(f"[plunge-count] {exc}") from None
    rows = []
    for R, spec in zip(radii, specs):
        count = plunge_count(RestrictionOperator(spec))
        rows.append(f"{R!r},{count},{count / R**2!r}")
    path = out / "plunge_count.csv"
    _write_csv(path, "radius,count,count_per_square_radius", rows, _provenance(cfg))
    return [path]


def _run_density(cfg: ExperimentConfig, out: Path) -> list[Path]:
    points_path = cfg.resolve_path("points_csv")
    radii = cfg.get_floats("radii")
    window = cfg.get_float("window", 0.0) or None
    try:
        lam = PhasePointSet.load_csv(points_path, window=window)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"[density] cannot load {points_path}: {exc}") from None
    if any(not 0 < r <= lam.window / 2 for r in radii):
        raise ConfigError(f"[density] radii must lie in (0, {lam.window / 2}]")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("[density] radii must be strictly increasing")
    rows = [
        f"{est.radius!r},{est.lower!r},{est.upper!r},{est.midpoint!r}"
        for est in density_trend(lam, radii)
    ]
    path = out / "density.csv"
    _write_csv(path, "radius,lower,upper,midpoint", rows, _provenance(cfg))
    return [path]


def _run_improve(cfg: ExperimentConfig, out: Path) -> list[Path]:
    grid = cfg.grid()
    radii = cfg.get_floats("radii")
    sigma = cfg.get_float("sigma", 1.0)
    try:
        system = corpus(cfg.get_str("recipe"), grid, cfg.seed)
    except ValueError as exc:
        raise ConfigError(f"[improve] {exc}") from None
    if any(r <= 0 for r in radii):
        raise ConfigError("[improve] radii must be positive")
    source = frame_bounds(system)
    rows = []
    for R in radii:
        result = improve_system(system, R, sigma)
        bounds = frame_bounds(result.system)
        rows.append(
            f"{R!r},{float(result.modulation_errors.mean())!r},{bounds.lower!r},{bounds.upper!r}"
        )
    path = out / "improve.csv"
    comments = _provenance(cfg) + [
        f"source bounds lower {source.lower!r} upper {source.upper!r}",
        f"modulation weight sigma {sigma!r}",
    ]
    _write_csv(path, "radius,mean_error,lower,upper", rows, comments)
    return [path]


def _run_dual_decay(cfg: ExperimentConfig, out: Path) -> list[Path]:
    grid = cfg.grid()
    try:
        system = corpus(cfg.get_str("recipe"), grid, cfg.seed)
    except ValueError as exc:
        raise ConfigError(f"[dual-decay] {exc}") from None
    primal = localization_fit(gramian(system), system.centers)
    dual = dual_system(system)
    shadow = localization_fit(gramian(dual), dual.centers)
    rows = [
        f"primal,{primal.exponent!r},{primal.constant!r},{primal.r2!r}",
        f"dual,{shadow.exponent!r},{shadow.constant!r},{shadow.r2!r}",
    ]
    path = out / "dual_decay.csv"
    _write_csv(path, "which,exponent,constant,r_squared", rows, _provenance(cfg))
    return [path]


def _run_uncertainty_sum(cfg: ExperimentConfig, out: Path) -> list[Path]:
    grid = cfg.grid()
    count = cfg.get_int("count", 64)
    if count < 2:
        raise ConfigError("[uncertainty-sum] count must be at least 2")
    try:
        system = corpus(f"hermite-onb({count})", grid, cfg.seed)
    except ValueError as exc:
        raise ConfigError(f"[uncertainty-sum] {exc}") from None
    ledger = commutation_ledger(system, system)
    path = out / "uncertainty_sum.csv"
    save_ledger_csv(path, ledger, comments=_provenance(cfg))
    return [path]


def _run_fock_sweep(cfg: ExperimentConfig, out: Path) -> list[Path]:
    alphas = cfg.get_floats("alphas")
    window = cfg.get_float("window", 6.0)
    if any(a <= 0 for a in alphas) or window <= 0:
        raise ConfigError("[fock-sweep] pitches and window must be positive")
    rows = lattice_sweep(alphas, window)
    path = out / "fock_sweep.csv"
    save_sweep_csv(path, rows, comments=_provenance(cfg))
    return [path]


_RUNNERS = {
    "balian-low": _run_balian_low,
    "trace-check": _run_trace_check,
    "plunge-count": _run_plunge_count,
    "density": _run_density,
    "improve": _run_improve,
    "dual-decay": _run_dual_decay,
    "uncertainty-sum": _run_uncertainty_sum,
    "fock-sweep": _run_fock_sweep,
}


def run(cfg: ExperimentConfig, out_dir) -> list[Path]:
    """Execute one experiment; artifacts are written only after full compute."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[cfg.experiment](cfg, out)
