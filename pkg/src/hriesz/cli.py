"""Config-driven experiment driver.

Subcommands: `kernel-check`, `norm-profile`, `growth-witness`, `cantor`,
each taking --config <path> and --out <dir>; --seed overrides the config
seed.  Reports are JSON/CSV with deterministic formatting: identical
(config, seed) pairs produce byte-identical files.  Exit codes: 0 success,
1 assertion-style finding, 2 config error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__, growth, kernel, measure, riesz
from .errors import ConfigError
from .group import HPoint
from .lattice import CubeId

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FINDING = 1
EXIT_CONFIG = 2
EXIT_DATA = 3


# ---------------------------------------------------------------- config ---

def _req(cfg, field, kind, where=""):
    path = f"{where}{field}"
    if field not in cfg:
        raise ConfigError(path, "missing required field")
    val = cfg[field]
    if kind is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if kind is int and isinstance(val, int) and not isinstance(val, bool):
        return val
    if not isinstance(val, kind) or isinstance(val, bool):
        raise ConfigError(path, f"expected {kind.__name__}, got {type(val).__name__}")
    return val


def _opt(cfg, field, kind, default, where=""):
    if field not in cfg:
        return default
    return _req(cfg, field, kind, where)


def parse_eps_rule(rule, depth):
    """An eps sequence: either an explicit list or a string like '4^-2k'."""
    if isinstance(rule, list):
        return tuple(float(e) for e in rule)
    if isinstance(rule, str):
        m = re.fullmatch(r"\s*(\d+)\s*\^\s*-\s*(\d+)\s*k\s*", rule)
        if not m:
            raise ConfigError("measure.eps_rule", f"cannot parse rule {rule!r}; want e.g. '4^-2k'")
        base, coef = int(m.group(1)), int(m.group(2))
        if base < 2 or coef < 1:
            raise ConfigError("measure.eps_rule", "base must be >= 2 and the exponent coefficient >= 1")
        return tuple(float(base) ** (-coef * k) for k in range(1, depth + 1))
    raise ConfigError("measure.eps_rule", "expected a list of scales or a rule string")


def _parse_cube(cfg, where):
    k = _req(cfg, "k", int, where)
    a = _req(cfg, "a", list, where)
    b = _req(cfg, "b", int, where)
    try:
        return CubeId(k, tuple(int(v) for v in a), b)
    except (TypeError, ValueError) as exc:
        raise ConfigError(where.rstrip("."), str(exc)) from None


class ExperimentConfig:
    """Validated experiment description; see README for the schema."""

    def __init__(self, raw: dict, base_dir: Path):
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        self.raw = raw
        self.n = _req(raw, "n", int)
        if self.n < 1:
            raise ConfigError("n", f"must be >= 1, got {self.n}")
        self.seed = _opt(raw, "seed", int, 0)
        self.output_dir = _opt(raw, "output_dir", str, ".")
        self.measure_spec = _opt(raw, "measure", dict, None)
        self.deltas = _opt(raw, "deltas", list, None)
        if self.deltas is not None:
            if not self.deltas:
                raise ConfigError("deltas", "must be nonempty when given")
            try:
                self.deltas = [float(d) for d in self.deltas]
            except (TypeError, ValueError):
                raise ConfigError("deltas", "entries must be numbers") from None
            if any(d <= 0 for d in self.deltas):
                raise ConfigError("deltas", "entries must be positive")
        g = _opt(raw, "growth", dict, {})
        try:
            self.growth = growth.GrowthParams(
                A=_opt(g, "A", float, 2.0, "growth."),
                M=_opt(g, "M", float, 128.0, "growth."),
                s=_opt(g, "s", float, 0.1, "growth."),
                j_max=_opt(g, "j_max", int, 3, "growth."),
            )
        except ValueError as exc:
            raise ConfigError("growth", str(exc)) from None
        self.domain = (
            _parse_cube(raw["domain"], "domain.")
            if "domain" in raw
            else CubeId(0, (0,) * (2 * self.n), 0)
        )
        if self.domain.n != self.n:
            raise ConfigError("domain", f"cube has n={self.domain.n} but config n={self.n}")
        self.c2_threshold = _opt(raw, "c2_threshold", float, 1000.0)
        self.scan_depth = _opt(raw, "scan_depth", int, None)
        exps = _opt(raw, "exponents", list, None)
        self.exponents = tuple(float(e) for e in exps) if exps else growth.DEFAULT_EXPONENTS
        nrm = _opt(raw, "norm", dict, {})
        self.norm_tol = _opt(nrm, "tol", float, 1e-8, "norm.")
        self.norm_max_iters = _opt(nrm, "max_iters", int, 10_000, "norm.")
        if self.norm_tol <= 0:
            raise ConfigError("norm.tol", "must be positive")
        if self.norm_max_iters < 1:
            raise ConfigError("norm.max_iters", "must be >= 1")
        self.radii = _opt(raw, "radii", list, None)
        self.centers = _opt(raw, "centers", list, None)
        kc = _opt(raw, "kernel_check", dict, {})
        self.kernel_samples = _opt(kc, "samples", int, 20000, "kernel_check.")
        if self.kernel_samples < 100:
            raise ConfigError("kernel_check.samples", "must be >= 100")
        self._base_dir = base_dir
        if self.measure_spec is not None:
            self._validate_measure(self.measure_spec)

    def _validate_measure(self, spec):
        mtype = _req(spec, "type", str, "measure.")
        if mtype == "atoms_file":
            path = self._base_dir / _req(spec, "path", str, "measure.")
            if not path.is_file():
                raise ConfigError("measure.path", f"file not found: {path}")
            spec["__path"] = path
        elif mtype == "uniform_cube":
            cube = _parse_cube(spec, "measure.")
            if cube.n != self.n:
                raise ConfigError("measure", f"cube has n={cube.n} but config n={self.n}")
            count = _req(spec, "count", int, "measure.")
            if count < 1:
                raise ConfigError("measure.count", "must be >= 1")
            total = _req(spec, "total", float, "measure.")
            if total <= 0:
                raise ConfigError("measure.total", "must be positive")
        elif mtype == "axis":
            t0 = _req(spec, "t0", float, "measure.")
            t1 = _req(spec, "t1", float, "measure.")
            if not t0 < t1:
                raise ConfigError("measure.t0", f"need t0 < t1, got {t0} >= {t1}")
            count = _req(spec, "count", int, "measure.")
            if count < 1:
                raise ConfigError("measure.count", "must be >= 1")
            scale = _opt(spec, "scale", float, 1.0, "measure.")
            if scale <= 0:
                raise ConfigError("measure.scale", "must be positive")
        elif mtype == "cantor":
            if self.n != 1:
                raise ConfigError("measure", "the Cantor tube construction requires n=1")
            depth = _req(spec, "depth", int, "measure.")
            if depth < 1:
                raise ConfigError("measure.depth", "must be >= 1")
            eps = parse_eps_rule(spec.get("eps_rule"), depth)
            try:
                spec["__params"] = measure.CantorParams(eps=eps, depth=depth)
            except ValueError as exc:
                raise ConfigError("measure.eps_rule", str(exc)) from None
        else:
            raise ConfigError("measure.type", f"unknown measure type {mtype!r}")

    def build_measure(self) -> measure.AtomicMeasure:
        spec = self.measure_spec
        if spec is None:
            raise ConfigError("measure", "missing required field")
        mtype = spec["type"]
        if mtype == "atoms_file":
            mu = measure.load_atoms(spec["__path"])
            if mu.n != self.n and len(mu) > 0:
                raise ConfigError("measure.path", f"file has n={mu.n} but config n={self.n}")
            return mu
        if mtype == "uniform_cube":
            cube = _parse_cube(spec, "measure.")
            return measure.uniform_on_cube(cube, spec["count"], float(spec["total"]), self.seed)
        if mtype == "axis":
            mu = measure.axis_segment_measure(
                float(spec["t0"]), float(spec["t1"]), spec["count"], n=self.n
            )
            scale = float(spec.get("scale", 1.0))
            return mu.scale(scale) if scale != 1.0 else mu
        if mtype == "cantor":
            return measure.cantor_tube_measure(spec["__params"])
        raise ConfigError("measure.type", f"unknown measure type {mtype!r}")

    def resolved(self) -> dict:
        out = {k: v for k, v in self.raw.items() if not k.startswith("__")}
        if isinstance(out.get("measure"), dict):
            out["measure"] = {k: v for k, v in out["measure"].items() if not k.startswith("__")}
        out["seed"] = self.seed
        return out


def load_config(path: str, seed_override=None) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config", f"file not found: {p}")
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    cfg = ExperimentConfig(raw, p.parent)
    if seed_override is not None:
        cfg.seed = seed_override
        cfg.raw["seed"] = seed_override
    return cfg


# --------------------------------------------------------------- reports ---

def _plain(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def write_json(path: Path, payload: dict):
    text = json.dumps(_plain(payload), sort_keys=True, indent=2)
    path.write_text(text + "\n", encoding="utf-8")


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(repr(float(v)))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _report_skeleton(cfg: ExperimentConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": cfg.resolved(),
    }


# ------------------------------------------------------------- commands ---

def _sample_points(rng, n, count, lo=0.5, hi=2.0):
    """Points with gauge in [lo, hi], gauge-uniform, generic directions."""
    z = rng.standard_normal((count, 2 * n))
    t = rng.standard_normal(count)
    g4 = (np.einsum("ij,ij->i", z, z)) ** 2 + 16.0 * t * t
    g = g4 ** 0.25
    target = rng.uniform(lo, hi, size=count)
    lam = target / g
    return z * lam[:, None], t * lam * lam


def run_kernel_checks(n: int, samples: int, seed: int) -> dict:
    rng = np.random.Generator(np.random.Philox(seed))
    checks = {}

    z, t = _sample_points(rng, n, samples)
    K = kernel.riesz_kernel_batch(z, t)
    closed = kernel.kernel_norm(z, t)
    got = np.linalg.norm(K, axis=1)
    rel = np.abs(got - closed) / closed
    checks["norm_closed_form"] = {
        "passed": bool(np.max(rel) <= 1e-12),
        "max_rel_error": float(np.max(rel)),
        "samples": samples,
    }

    taxis = rng.uniform(-2.0, 2.0, size=samples)
    taxis = np.where(taxis == 0.0, 1.0, taxis)
    Kax = kernel.riesz_kernel_batch(np.zeros((samples, 2 * n)), taxis)
    checks["axis_vanishing"] = {
        "passed": bool(np.max(np.abs(Kax)) == 0.0),
        "max_abs": float(np.max(np.abs(Kax))),
        "samples": samples,
    }

    lam = rng.uniform(0.3, 3.0, size=samples)
    Kd = kernel.riesz_kernel_batch(z * lam[:, None], t * lam * lam)
    pred = K * (lam ** (-(2.0 * n + 1.0)))[:, None]
    rel = np.linalg.norm(Kd - pred, axis=1) / np.linalg.norm(pred, axis=1)
    checks["dilation_homogeneity"] = {
        "passed": bool(np.max(rel) <= 1e-12),
        "max_rel_error": float(np.max(rel)),
        "samples": samples,
    }

    Kinv = kernel.riesz_kernel_batch(-z, -t)
    rel = np.abs(np.linalg.norm(Kinv, axis=1) - got) / got
    checks["inversion_norm_evenness"] = {
        "passed": bool(np.max(rel) <= 1e-12),
        "max_rel_error": float(np.max(rel)),
        "samples": samples,
    }

    tc = rng.uniform(0.1, 2.0, size=samples) * rng.choice([-1.0, 1.0], size=samples)
    radius = 16.0 * np.abs(tc) ** (n + 1) * rng.uniform(0.0, 1.0, size=samples)
    dirs = rng.standard_normal((samples, 2 * n))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    zc = dirs * radius[:, None]
    norms = kernel.kernel_norm(zc, tc)
    bound = 32.0 * n / 4.0 ** (n + 1)
    checks["cone_bound"] = {
        "passed": bool(np.max(norms) <= bound),
        "max_norm": float(np.max(norms)),
        "bound": bound,
        "samples": samples,
    }

    grad_samples = min(200, samples)
    zi, ti = z[:grad_samples], t[:grad_samples]
    errs = {h: [] for h in (1e-3, 1e-4, 1e-5)}
    for i in range(grad_samples):
        p = HPoint(zi[i], ti[i])
        exact = kernel.riesz_kernel(p)
        scale = np.linalg.norm(exact)
        if scale < 1e-4:
            continue
        for h in errs:
            fd = kernel.horizontal_gradient_fd(kernel.fundamental_solution, p, h)
            errs[h].append(np.linalg.norm(fd - exact) / scale)
    hs = sorted(errs)
    med = [float(np.median(errs[h])) for h in hs]
    slope = float(np.polyfit(np.log(hs), np.log(med), 1)[0])
    max_rel = float(np.max(errs[1e-5]))
    checks["gradient_oracle"] = {
        "passed": bool(max_rel <= 1e-6 and abs(slope - 2.0) <= 0.3),
        "max_rel_error_h1e-5": max_rel,
        "slope": slope,
        "samples": grad_samples,
    }

    trip = min(samples, 20000)
    zp, tp = _sample_points(rng, n, trip, 0.1, 10.0)
    zq1, tq1 = _sample_points(rng, n, trip, 0.1, 10.0)
    zq2, tq2 = _sample_points(rng, n, trip, 0.1, 10.0)
    ratios = kernel.continuity_ratio_batch(zp, tp, zq1, tq1, zq2, tq2)
    lam3 = 3.0
    scaled = kernel.continuity_ratio_batch(
        lam3 * zp, lam3 * lam3 * tp,
        lam3 * zq1, lam3 * lam3 * tq1,
        lam3 * zq2, lam3 * lam3 * tq2,
    )
    drift = float(np.max(np.abs(scaled - ratios) / ratios))
    checks["continuity_ratio"] = {
        "passed": bool(np.all(np.isfinite(ratios)) and drift <= 1e-10),
        "max_ratio": float(np.max(ratios)),
        "dilation_drift": drift,
        "samples": trip,
    }
    return checks


def cmd_kernel_check(cfg: ExperimentConfig, out_dir: Path) -> int:
    checks = run_kernel_checks(cfg.n, cfg.kernel_samples, cfg.seed)
    report = _report_skeleton(cfg)
    report["checks"] = checks
    report["passed"] = all(c["passed"] for c in checks.values())
    write_json(out_dir / "kernel_check.json", report)
    return EXIT_OK if report["passed"] else EXIT_FINDING


def cmd_norm_profile(cfg: ExperimentConfig, out_dir: Path) -> int:
    if cfg.deltas is None:
        raise ConfigError("deltas", "missing required field")
    mu = cfg.build_measure()
    if len(mu) == 0:
        print("error: the configured measure is empty", file=sys.stderr)
        return EXIT_DATA
    profile = riesz.operator_norm_profile(
        mu, cfg.deltas, tol=cfg.norm_tol, max_iters=cfg.norm_max_iters, seed=cfg.seed
    )
    write_csv(
        out_dir / "norm_profile.csv",
        ["delta", "value", "iterations", "residual"],
        [(e.delta, e.value, e.iterations, e.residual) for e in profile],
    )
    sup = max(profile, key=lambda e: e.value)
    report = _report_skeleton(cfg)
    report["profile"] = [
        {"delta": e.delta, "value": e.value, "iterations": e.iterations, "residual": e.residual}
        for e in profile
    ]
    report["sup_value"] = sup.value
    report["sup_delta"] = sup.delta
    report["atoms"] = len(mu)
    report["backend"] = riesz.backend_name()
    write_json(out_dir / "norm_profile.json", report)
    return EXIT_OK


def _write_levels_and_dimension(out_dir: Path, result) -> None:
    if result.verdict == "witness":
        st = result.state
        write_csv(
            out_dir / "levels.csv",
            ["j", "mass", "packing_sum", "min_sidelength"],
            [
                (j, lv.mass, lv.packing_sum, lv.min_sidelength)
                for j, lv in enumerate(st.levels)
            ],
        )
        n_levels = len(st.levels)
        header = ["exponent"] + [f"S_{j}" for j in range(n_levels)] + ["verdict"]
        write_csv(
            out_dir / "dimension.csv",
            header,
            [(r.exponent, *r.sums, r.verdict) for r in result.dimension.rows],
        )
    else:
        write_csv(out_dir / "levels.csv", ["j", "mass", "packing_sum", "min_sidelength"], [])
        write_csv(out_dir / "dimension.csv", ["exponent", "verdict"], [])


def cmd_growth_witness(cfg: ExperimentConfig, out_dir: Path) -> int:
    if cfg.deltas is None:
        raise ConfigError("deltas", "missing required field")
    mu = cfg.build_measure()
    if len(mu) == 0:
        print("error: the configured measure is empty", file=sys.stderr)
        return EXIT_DATA
    profile = riesz.operator_norm_profile(
        mu, cfg.deltas, tol=cfg.norm_tol, max_iters=cfg.norm_max_iters, seed=cfg.seed
    )
    result = growth.growth_witness(
        mu,
        cfg.domain,
        cfg.growth,
        profile,
        cfg.c2_threshold,
        scan_depth=cfg.scan_depth,
        exponents=cfg.exponents,
    )
    report = _report_skeleton(cfg)
    report["result"] = result.to_dict()
    if cfg.radii and cfg.centers:
        centers = [HPoint(np.asarray(c[:-1], dtype=float), float(c[-1])) for c in cfg.centers]
        value, (c_best, r_best) = growth.growth_constant(mu, centers, cfg.radii)
        report["ball_growth"] = {
            "value": value,
            "argmax_center": list(c_best.as_array()),
            "argmax_radius": r_best,
        }
    write_json(out_dir / "witness.json", report)
    _write_levels_and_dimension(out_dir, result)
    if result.verdict == "certificate" and result.exceeds_threshold:
        print(
            "finding: growth bound violated at experimental threshold "
            f"(value {result.value!r} > c2_threshold {cfg.c2_threshold!r})",
            file=sys.stderr,
        )
        return EXIT_FINDING
    return EXIT_OK


def _min_pair_distance(mu) -> float:
    from .group import knorm4_of_offsets, offsets_from

    best = math.inf
    for i in range(len(mu) - 1):
        p, _ = mu.atom(i)
        dz, dt = offsets_from(p, mu.zs[i + 1 :], mu.ts[i + 1 :])
        best = min(best, float(np.min(knorm4_of_offsets(dz, dt))))
    return best ** 0.25


def cmd_cantor(cfg: ExperimentConfig, out_dir: Path) -> int:
    if cfg.n != 1:
        raise ConfigError("n", "the cantor command requires n=1")
    if cfg.measure_spec is None or cfg.measure_spec.get("type") != "cantor":
        raise ConfigError("measure.type", "the cantor command requires a cantor measure")
    mu = cfg.build_measure()
    params = cfg.measure_spec["__params"]
    measure.save_atoms(mu, out_dir / "atoms.csv")
    if cfg.deltas is not None:
        deltas = cfg.deltas
    elif len(mu) > 1:
        deltas = [_min_pair_distance(mu) / 2.0]
    else:
        deltas = [1.0]
    profile = riesz.operator_norm_profile(
        mu, deltas, tol=cfg.norm_tol, max_iters=cfg.norm_max_iters, seed=cfg.seed
    )
    write_csv(
        out_dir / "norm_profile.csv",
        ["delta", "value", "iterations", "residual"],
        [(e.delta, e.value, e.iterations, e.residual) for e in profile],
    )
    report = _report_skeleton(cfg)
    report["depth"] = params.depth
    report["eps"] = list(params.eps[: params.depth])
    report["atoms"] = len(mu)
    report["total_mass"] = mu.total_mass
    report["sup_norm"] = max(e.value for e in profile)
    report["deltas"] = deltas
    write_json(out_dir / "cantor_summary.json", report)
    return EXIT_OK


# ------------------------------------------------------------------ main ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hriesz",
        description="Riesz-transform experiments on the Heisenberg group",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--out", default=None, help="output directory (default: config output_dir)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


COMMANDS = {
    "kernel-check": cmd_kernel_check,
    "norm-profile": cmd_norm_profile,
    "growth-witness": cmd_growth_witness,
    "cantor": cmd_cantor,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed)
        out_dir = Path(args.out) if args.out is not None else Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
