"""Experiment configuration and the drivers behind the command line."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ansflow import checks
from ansflow.data import (OscillatoryDataSpec, gen_oscillatory, gen_random_bandlimited, gen_shear,
                          modulated_profile, snapped_carrier)
from ansflow.dyadic import make_partition
from ansflow.io import write_csv
from ansflow.nonlinear import e_functional
from ansflow.norms import BesovParams, besov_static, prop1_norms
from ansflow.solver import SolverConfig, continuous_dependence_run, solve_w
from ansflow.spectral import Grid, VectorField

TWO_PI = 2 * math.pi


class ConfigError(ValueError):
    pass


def _floats(s: str) -> tuple:
    return tuple(float(x) for x in s.split(",") if x.strip())


def _ints(s: str) -> tuple:
    return tuple(int(x) for x in s.split(",") if x.strip())


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_float(s: str):
    return None if s.strip().lower() in ("", "none", "auto") else float(s)


def _length(s: str) -> float:
    """A box length, optionally written as a multiple of pi ("2pi", "pi/4")."""
    t = s.strip().lower().replace(" ", "")
    if "pi" not in t:
        return float(t)
    num, _, den = t.partition("/")
    coef = num.replace("pi", "").replace("*", "") or "1"
    return float(coef) * math.pi / (float(den) if den else 1.0)


# key -> (parser, default)
SCHEMA = {
    "seed": (int, 0),
    "output.dir": (str, "out"),
    "grid.n1": (int, 32),
    "grid.n2": (int, 32),
    "grid.n3": (int, 32),
    "grid.L1": (_length, TWO_PI),
    "grid.L2": (_length, TWO_PI),
    "grid.L3": (_length, TWO_PI),
    "solver.nu_h": (float, 0.1),
    "solver.nu_3": (float, 0.0),
    "solver.dt": (float, 1e-2),
    "solver.T": (float, 1.0),
    "solver.n_cutoff": (_opt_float, None),
    "solver.integrator": (str, "IF-RK4"),
    "solver.record_every": (int, 0),
    "solver.accumulate_every": (int, 1),
    "besov.p": (float, 8.0),
    "data.kind": (str, "oscillatory"),
    "data.epsilon": (float, 0.25),
    "data.q": (float, 4.0),
    "data.ring_h": (float, 1.0),
    "data.ring_v": (float, 1.0),
    "data.amplitude": (float, 1.0),
    "data.h_bands": (_ints, ()),
    "data.v_bands": (_ints, ()),
    "data.spectral_slope": (float, 0.0),
    "data.mode": (int, 1),
    "data.input": (str, ""),
    "sweep.epsilon": (_floats, tuple(2.0**-i for i in range(3, 8))),
    "sweep.q": (float, 4.0),
    "sweep.alpha": (_floats, (0.5, 1.0)),
    "sweep.sigma": (_floats, (0.5, 1.0)),
    "sweep.planar_n": (int, 512),
    "sweep.prop1": (_bool, True),
    "sweep.efunctional": (_bool, True),
    "sweep.p": (_floats, ()),
    "sweep.workers": (int, 1),
    "smallness.amplitudes": (_floats, (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)),
    "smallness.growth_factor": (float, 2.0),
    "compare.delta": (float, 1e-4),
    "check.n": (int, 32),
    "check.suites": (str, "divergence,scale_invariance,bernstein,embedding,oracles"),
    "check.phi_exponent": (float, 1.0),
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment; unknown keys raise."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = SCHEMA[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return out


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


@dataclass
class ExperimentConfig:
    command: str
    solver: SolverConfig
    besov: BesovParams
    values: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def out_dir(self) -> Path:
        return Path(self.values["output.dir"])

    @property
    def grid(self) -> Grid:
        return self.solver.grid

    @property
    def epsilons(self) -> tuple:
        return self.values["sweep.epsilon"]

    def get(self, key):
        return self.values[key]

    def param_tuple(self) -> dict:
        """Parameters stamped on every CSV row."""
        g = self.grid
        s = self.solver
        return {"n1": g.n1, "n2": g.n2, "n3": g.n3, "L1": g.L1, "L2": g.L2, "L3": g.L3,
                "nu_h": s.nu_h, "nu_3": s.nu_3, "p": self.besov.p, "dt": s.dt, "T": s.T,
                "seed": self.seed}


def build_config(command: str, values: dict | None = None, overrides: dict | None = None
                 ) -> ExperimentConfig:
    """Merge defaults, file values and command-line overrides, then validate."""
    v = {k: d for k, (_, d) in SCHEMA.items()}
    v.update(values or {})
    v.update({k: x for k, x in (overrides or {}).items() if x is not None})
    unknown = set(v) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    if not 0 <= v["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    try:
        grid = Grid(v["grid.n1"], v["grid.n2"], v["grid.n3"],
                    v["grid.L1"], v["grid.L2"], v["grid.L3"])
        solver = SolverConfig(grid, v["solver.nu_h"], v["solver.nu_3"], v["solver.dt"],
                              v["solver.T"], v["solver.n_cutoff"], v["solver.integrator"],
                              max(2.0, v["besov.p"]), v["solver.record_every"],
                              v["solver.accumulate_every"])
        besov = BesovParams(v["besov.p"], v["solver.nu_h"], v["solver.nu_3"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = ExperimentConfig(command, solver, besov, v)
    if command == "sweep-eps":
        eps = cfg.epsilons
        if len(eps) < 4:
            raise ConfigError("an epsilon sweep needs at least 4 values")
        for e in eps:
            if not e > 0:
                raise ConfigError("epsilon values must be positive")
        if any(p < 2 for p in cfg.get("sweep.p")):
            raise ConfigError("sweep.p values must be >= 2")
    return cfg


# ------------------------------------------------------------------ data

def make_data(cfg: ExperimentConfig) -> VectorField:
    kind = cfg.get("data.kind")
    g = cfg.grid
    try:
        if kind == "oscillatory":
            spec = OscillatoryDataSpec(cfg.get("data.epsilon"), cfg.get("data.q"),
                                       cfg.get("data.ring_h"), cfg.get("data.ring_v"),
                                       cfg.get("data.amplitude"))
            return gen_oscillatory(spec, g)
        if kind == "random":
            hb = cfg.get("data.h_bands") or None
            vb = cfg.get("data.v_bands") or None
            return gen_random_bandlimited(cfg.seed, g, hb, vb, cfg.get("data.amplitude"),
                                          cfg.get("data.spectral_slope"))
        if kind == "shear":
            return gen_shear(g, cfg.get("data.amplitude"), cfg.get("data.mode"))
        if kind == "file":
            from ansflow.io import read_vector

            u = read_vector(cfg.get("data.input"), divergence_free=True)
            if u.grid != g:
                raise ConfigError("input field grid differs from the configured grid")
            return u
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown data.kind {kind!r}")


# ------------------------------------------------------------------ fits

def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


# ------------------------------------------------------------------ epsilon sweep

@dataclass
class SweepResult:
    prop1_rows: list
    efunctional_rows: list
    slopes: dict
    paths: list


PROP1_HEADER = ("epsilon", "carrier", "q", "alpha", "sigma", "tilde_B_sigma_q1", "dot_B_alpha_q1",
                "dot_B_sigma_qinf", "planar_n")
EF_HEADER = ("epsilon", "carrier", "q", "p_value", "besov_B4", "besov_part", "forcing_part",
             "total", "div_residual")


def _prop1_point(e, n, q, pairs) -> list:
    """Rows of the planar oscillation norms at one epsilon."""
    pg = Grid.planar(n)
    try:
        prof = modulated_profile(e, pg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    m = snapped_carrier(e, pg)
    return [(e, m, q, a, s) + tuple(prop1_norms(prof, s, a, q)) + (n,) for a, s in pairs]


def _efunctional_point(e, grid, q, ring_h, ring_v, amplitude, p_values, nu_h, nu_3) -> list:
    """Rows of the smallness functional at one epsilon, one row per p."""
    try:
        u = gen_oscillatory(OscillatoryDataSpec(e, q, ring_h, ring_v, amplitude), grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    b4 = besov_static(u, 4.0)
    div = u.divergence_residual()
    rows = []
    for p in p_values:
        r = e_functional(u, BesovParams(p, nu_h, nu_3))
        rows.append((e, snapped_carrier(e, grid), q, p, b4, r.besov_part, r.forcing_part,
                     r.total, div))
    return rows


def _map_points(fn, args_list, workers: int) -> list:
    if workers <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args_list)))


def _write_points(directory: Path, stem: str, header, points, pt: dict) -> Path:
    """One CSV per sweep point, then the merged file in sweep order."""
    pdir = directory / "sweep_points"
    pdir.mkdir(parents=True, exist_ok=True)
    merged = []
    for i, rows in enumerate(points):
        rows = [r + tuple(pt.values()) for r in rows]
        write_csv(pdir / f"{stem}_{i:03d}_eps{rows[0][0]:.6g}.csv", header + tuple(pt), rows)
        merged.extend(rows)
    path = directory / f"{stem}.csv"
    write_csv(path, header + tuple(pt), merged)
    return path


def run_epsilon_sweep(cfg: ExperimentConfig, write: bool = True) -> SweepResult:
    """Planar oscillation norms and the smallness functional over the epsilon list.

    Slopes are log-log fits against epsilon.  Points are independent and run
    in ``sweep.workers`` processes.
    """
    eps = cfg.epsilons
    q = cfg.get("sweep.q")
    workers = cfg.get("sweep.workers")
    slopes: dict = {}
    prop1_pts, ef_pts = [], []
    if cfg.get("sweep.prop1"):
        alphas, sigmas = cfg.get("sweep.alpha"), cfg.get("sweep.sigma")
        if len(alphas) != len(sigmas):
            raise ConfigError("sweep.alpha and sweep.sigma must have the same length")
        pairs = tuple(zip(alphas, sigmas))
        prop1_pts = _map_points(_prop1_point, [(e, cfg.get("sweep.planar_n"), q, pairs)
                                               for e in eps], workers)
        for i, (a, s) in enumerate(pairs):
            vals = np.array([pt[i][5:8] for pt in prop1_pts])
            slopes[f"tilde_B_sigma{s:g}"] = loglog_slope(eps, vals[:, 0])
            slopes[f"dot_B1_alpha{a:g}"] = loglog_slope(eps, vals[:, 1])
            slopes[f"dot_Binf_sigma{s:g}"] = loglog_slope(eps, vals[:, 2])
    if cfg.get("sweep.efunctional"):
        p_values = cfg.get("sweep.p") or (cfg.besov.p,)
        args = [(e, cfg.grid, q, cfg.get("data.ring_h"), cfg.get("data.ring_v"),
                 cfg.get("data.amplitude"), p_values, cfg.besov.nu_h, cfg.besov.nu_3)
                for e in eps]
        ef_pts = _map_points(_efunctional_point, args, workers)
        for i, p in enumerate(p_values):
            arr = np.array([pt[i][4:8] for pt in ef_pts])
            slopes[f"E_total_p{p:g}"] = loglog_slope(eps, arr[:, 3])
            slopes[f"E_besov_part_p{p:g}"] = loglog_slope(eps, arr[:, 1])
            slopes[f"E_forcing_part_p{p:g}"] = loglog_slope(eps, arr[:, 2])
        b4 = np.array([pt[0][4] for pt in ef_pts])
        slopes["B4_variation"] = float(b4.max() / b4.min() - 1)
    prop1_rows = [r for pt in prop1_pts for r in pt]
    ef_rows = [r for pt in ef_pts for r in pt]
    paths = []
    if write:
        out = cfg.out_dir
        out.mkdir(parents=True, exist_ok=True)
        pt = cfg.param_tuple()
        if prop1_pts:
            paths.append(_write_points(out, "sweep_prop1", PROP1_HEADER, prop1_pts, pt))
        if ef_pts:
            paths.append(_write_points(out, "sweep_efunctional", EF_HEADER, ef_pts, pt))
        paths.append(out / "sweep_slopes.csv")
        write_csv(paths[-1], ("quantity", "slope") + tuple(pt),
                  [(k, v) + tuple(pt.values()) for k, v in slopes.items()])
    return SweepResult(prop1_rows, ef_rows, slopes, paths)


# ------------------------------------------------------------------ smallness

SMALLNESS_HEADER = ("amplitude", "besov_part", "forcing_part", "E_T", "w_b012", "ratio",
                    "blew_up", "flagged")


@dataclass
class SmallnessResult:
    rows: list
    first_flagged: float | None
    path: Path | None


def run_smallness_study(cfg: ExperimentConfig, base: VectorField | None = None,
                        write: bool = True) -> SmallnessResult:
    """solve_w over a ladder of amplitudes; ratio = ||w||_{B^{0,1/2}(T)} / [u0]_{E^p_T}.

    A row is flagged when the run blows up or its ratio exceeds
    ``growth_factor`` times the ratio of the smallest nonzero amplitude.
    """
    base = base if base is not None else make_data(cfg)
    amps = sorted(cfg.get("smallness.amplitudes"))
    growth = cfg.get("smallness.growth_factor")
    T = cfg.solver.T
    rows = []
    ref = None
    first = None
    for a in amps:
        if a == 0:
            rows.append((0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0, 0))
            continue
        u0 = base * a
        ef = e_functional(u0, cfg.besov, T)
        res = solve_w(u0, cfg.solver)
        wb = res.accumulator.b012()
        ratio = wb / ef.total if ef.total > 0 else 0.0
        blew = res.record.blew_up
        if ref is None and not blew:
            ref = ratio
        flagged = blew or (ref is not None and ratio > growth * max(ref, 1e-300))
        if flagged and first is None:
            first = a
        rows.append((a, ef.besov_part, ef.forcing_part, ef.total, wb, ratio, int(blew),
                     int(flagged)))
    path = None
    if write:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        path = cfg.out_dir / "smallness.csv"
        pt = cfg.param_tuple()
        write_csv(path, SMALLNESS_HEADER + tuple(pt), [r + tuple(pt.values()) for r in rows])
    return SmallnessResult(rows, first, path)


# ------------------------------------------------------------------ compare

COMPARE_HEADER = ("delta_rel", "delta0", "sup_ratio", "norm_u1", "norm_u2", "exponent_base",
                  "fitted_C", "blew_up")


@dataclass
class CompareResult:
    rows: list
    ratio_change: float
    series: list
    path: Path | None


def perturbation(cfg: ExperimentConfig) -> VectorField:
    """Unit-L2 random divergence-free perturbation over every dealiased mode."""
    g = cfg.grid
    d = gen_random_bandlimited(cfg.seed + 1, g, None, None, 1.0)
    return d * (1.0 / d.l2_norm())


def run_compare(cfg: ExperimentConfig, u0: VectorField | None = None,
                write: bool = True) -> CompareResult:
    """Continuous dependence at ||delta0|| = delta ||u0|| and delta / 2."""
    u0 = u0 if u0 is not None else make_data(cfg)
    try:
        solver = replace(cfg.solver, track_besov=True)
        d = perturbation(cfg)
        rows, series = [], []
        for rel in (cfg.get("compare.delta"), cfg.get("compare.delta") / 2):
            u2 = u0 + d * (rel * u0.l2_norm())
            rep = continuous_dependence_run(u0, u2, solver)
            rows.append((rel, rep.delta0, rep.sup_ratio, rep.norms[0], rep.norms[1],
                         rep.exponent_base, rep.fitted_C, int(rep.blew_up)))
            series.append(rep)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    change = abs(rows[1][2] - rows[0][2]) / rows[0][2]
    path = None
    if write:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        path = cfg.out_dir / "compare.csv"
        pt = cfg.param_tuple()
        write_csv(path, COMPARE_HEADER + tuple(pt), [r + tuple(pt.values()) for r in rows])
    return CompareResult(rows, change, series, path)


# ------------------------------------------------------------------ checks

@dataclass
class CheckReport:
    suites: list
    seconds: float

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def as_json(self) -> str:
        return json.dumps({"passed": self.passed, "seconds": round(self.seconds, 2),
                           "suites": [s.as_dict() for s in self.suites]}, indent=2)


def run_checks(cfg: ExperimentConfig, write: bool = True) -> CheckReport:
    names = [s.strip() for s in cfg.get("check.suites").split(",") if s.strip()]
    unknown = [n for n in names if n not in checks.SUITES]
    if unknown:
        raise ConfigError(f"unknown check suites {unknown}; known: {sorted(checks.SUITES)}")
    phi = make_partition(cfg.get("check.phi_exponent"))
    if "partition" not in names:
        names.insert(0, "partition")
    t0 = time.perf_counter()
    results = [checks.SUITES[n](cfg.get("check.n"), cfg.seed, phi) for n in names]
    rep = CheckReport(results, time.perf_counter() - t0)
    if write:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        (cfg.out_dir / "checks.json").write_text(rep.as_json())
    return rep
