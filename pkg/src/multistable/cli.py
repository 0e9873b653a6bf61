"""Command-line entry point: simulate / verify / estimate.

Configuration is a single JSON file (schema below); process definitions
are too structured for flags.  The CLI never renders plots; it emits the
data plus a gnuplot script.

Exit codes: 0 success, 1 simulation or check failure, 2 invalid
configuration or inputs.  stdout carries at most a progress line;
diagnostics go to stderr.

Config schema (all keys optional unless noted)::

    {
      "schema_version": 1,
      "process": {"kind": "fbm", "h": 0.7, "alpha": 1.5,
                   "amplitude": 1.0, "a_coef": 1.0, "b_coef": 0.0,
                   "decay": 1.0, "kernel_table": {...FuncTable...}},
      "simulation": {"t_grid": [0.0, ...] or {"start","stop","num"},
                      "n_paths": 1, "seed": 0, "stream_offset": 0,
                      "truncation": {...}, "wiener": {...}},
      "output": {"format": "per-path" | "wide"},
      "verify": {"n": 2000, "seed": 1234},
      "estimate": {"u_list": [0.5], "window": 0.25, "n_paths": 500}
    }

FuncTable values may be plain numbers (constants) or objects with a
"kind" of constant / linear / sinusoid / piecewise.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    CheckResult,
    DiagnosticReport,
    empirical_cf,
    estimate_alpha,
    estimate_h,
    ks_critical,
    ks_distance,
    moment_scaling_check,
    scaling_probe,
    transfer_condition_probe,
)
from .functables import FuncTable
from .kernels import QuadConfig, series_normalizer
from .poisson import (
    PointFunctional,
    Rectangle,
    cf_closed_form,
    completion_std,
    generate_cloud,
    sum_functional,
)
from .processes import (
    ConfigError,
    ProcessSpec,
    SamplePath,
    SimulationConfig,
    TruncationConfig,
    WienerConfig,
    ensemble,
    field_pair_sampler,
    _make_engine,
)
from .rng import RngStream

SUITES = ("cf-check", "reduction", "sssi", "localisability",
          "moment-scaling", "transfer-condition")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("MULTISTABLE_THREADS", "1")))
    except ValueError:
        return 1


# ----------------------------------------------------------------------
# config handling
# ----------------------------------------------------------------------

def _grid_from_json(obj):
    if isinstance(obj, dict):
        need = {"start", "stop", "num"}
        if not need.issubset(obj):
            raise ConfigError(f"t_grid object needs keys {sorted(need)}")
        return tuple(np.linspace(obj["start"], obj["stop"], int(obj["num"])))
    return tuple(float(v) for v in obj)


def _subconfig(cls, obj: dict, name: str):
    known = set(cls.__dataclass_fields__)
    extra = set(obj) - known
    if extra:
        raise ConfigError(f"unknown {name} keys: {sorted(extra)}")
    if "x_extent" in obj and obj["x_extent"] is not None:
        obj = dict(obj, x_extent=tuple(obj["x_extent"]))
    return cls(**obj)


class RunConfig:
    """Parsed and normalized configuration file."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        ver = raw.get("schema_version", 1)
        if ver != 1:
            raise ConfigError(f"unsupported schema_version {ver}")
        if "process" not in raw:
            raise ConfigError("config needs a 'process' section")
        self.process = ProcessSpec.from_json(raw["process"])
        sim = dict(raw.get("simulation", {}))
        if "t_grid" not in sim:
            raise ConfigError("simulation section needs t_grid")
        sim["t_grid"] = _grid_from_json(sim["t_grid"])
        trunc = _subconfig(TruncationConfig, sim.pop("truncation", {}),
                           "truncation")
        wiener = _subconfig(WienerConfig, sim.pop("wiener", {}), "wiener")
        quad = _subconfig(QuadConfig, sim.pop("quad", {}), "quad")
        known = {"t_grid", "n_paths", "seed", "stream_offset"}
        extra = set(sim) - known
        if extra:
            raise ConfigError(f"unknown simulation keys: {sorted(extra)}")
        self.simulation = SimulationConfig(truncation=trunc, wiener=wiener,
                                           quad=quad, **sim)
        self.output = {"format": "per-path"}
        self.output.update(raw.get("output", {}))
        if self.output["format"] not in ("per-path", "wide"):
            raise ConfigError("output.format must be 'per-path' or 'wide'")
        self.verify = {"n": 2000, "seed": 1234}
        self.verify.update(raw.get("verify", {}))
        self.estimate = {"u_list": [], "window": 0.25, "n_paths": 500}
        self.estimate.update(raw.get("estimate", {}))
        # validate parameter ranges before any sampling
        t = self.simulation.times
        self.process.validate(float(t[0]), float(t[-1]))

    def to_json(self) -> dict:
        sim = self.simulation
        return {
            "schema_version": 1,
            "process": self.process.to_json(),
            "simulation": {
                "t_grid": list(sim.t_grid),
                "n_paths": sim.n_paths,
                "seed": sim.seed,
                "stream_offset": sim.stream_offset,
                "truncation": {k: (list(v) if isinstance(v, tuple) else v)
                               for k, v in asdict(sim.truncation).items()},
                "wiener": asdict(sim.wiener),
                "quad": asdict(sim.quad),
            },
            "output": dict(self.output),
            "verify": dict(self.verify),
            "estimate": dict(self.estimate),
        }


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return RunConfig(raw)


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------

def _write(path: Path, text: str) -> dict:
    data = text.encode()
    path.write_bytes(data)
    return {"name": path.name, "sha256": hashlib.sha256(data).hexdigest(),
            "bytes": len(data)}


def _gnuplot_script(files, wide: bool) -> str:
    lines = ["# quick-look plot script (gnuplot)",
             "set datafile separator ','",
             "set key off", "set xlabel 't'", "set ylabel 'Y(t)'"]
    if wide:
        lines.append(f"plot for [i=2:*] '{files[0]}' using 1:i with lines")
    else:
        plots = ", ".join(f"'{f}' using 1:2 with lines" for f in files)
        lines.append(f"plot {plots}")
    return "\n".join(lines) + "\n"


def run_simulate(cfg: RunConfig, out_dir: str, threads: int = 1) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec, sim = cfg.process, cfg.simulation
    eng = _make_engine(spec, sim)
    n = sim.n_paths
    t = sim.times
    ys = np.empty((n, len(t)))

    def work(i):
        ys[i] = eng.values(RngStream(sim.seed, sim.stream_offset + i))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(n)))
    else:
        for i in range(n):
            work(i)

    meta_common = {
        "kind": spec.kind,
        "process": spec.to_json(),
        "seed": sim.seed,
        "truncation": eng.provenance(),
        "package_version": __version__,
    }
    files = []
    if cfg.output["format"] == "wide" and n > 1:
        buf = [f"# schema_version: {1}"]
        for key in sorted(meta_common):
            buf.append(f"# {key}: {json.dumps(meta_common[key], sort_keys=True)}")
        buf.append("t," + ",".join(f"y{i:04d}" for i in range(n)))
        for j, tj in enumerate(t):
            buf.append(f"{float(tj)!r},"
                       + ",".join(f"{float(ys[i, j])!r}" for i in range(n)))
        files.append(_write(out / "ensemble.csv", "\n".join(buf) + "\n"))
        plot_files = ["ensemble.csv"]
    else:
        plot_files = []
        for i in range(n):
            meta = dict(meta_common)
            meta["stream_id"] = sim.stream_offset + i
            sp = SamplePath(t=t, y=ys[i], meta=meta)
            name = f"path_{i:04d}.csv"
            files.append(_write(out / name, sp.to_csv()))
            plot_files.append(name)
    files.append(_write(out / "plot.gp",
                        _gnuplot_script(plot_files,
                                        cfg.output["format"] == "wide" and n > 1)))
    digest = hashlib.sha256(
        "".join(f["sha256"] for f in sorted(files, key=lambda f: f["name"]))
        .encode()).hexdigest()
    manifest = {
        "schema_version": 1,
        "command": "simulate",
        "config": cfg.to_json(),
        "package_version": __version__,
        "files": sorted(files, key=lambda f: f["name"]),
        "digest": digest,
    }
    _write(out / "manifest.json", json.dumps(manifest, sort_keys=True, indent=1))
    print(f"wrote {len(files) + 1} files to {out} (digest {digest[:16]})")
    return 0


# ----------------------------------------------------------------------
# verify suites
# ----------------------------------------------------------------------

def _suite_cf_check(cfg: RunConfig):
    n = int(cfg.verify["n"]) * 2
    seed = int(cfg.verify["seed"])
    checks = []
    cases = [
        ("indicator", PointFunctional(
            space=lambda x: ((x >= 0) & (x <= 1)).astype(float), alpha=1.5,
            breakpoints=(0.0, 1.0)), Rectangle(0.0, 1.0, 300.0), 1.0),
        ("exp-ou", PointFunctional(
            space=lambda x: np.where(x >= 0, np.exp(-np.minimum(x, 700.0)), 0.0),
            alpha=1.5, breakpoints=(0.0,)), Rectangle(0.0, 18.0, 300.0), 1.0),
    ]
    thetas = (0.25, 0.5, 1.0, 1.5, 2.0)
    for name, pf, rect, l2 in cases:
        # int f^2 over the rect for the completion variance
        xs = np.linspace(rect.x_lo, rect.x_hi, 20001)
        f2 = float(np.trapezoid(np.asarray(pf.space(xs)) ** 2, xs))
        sig = completion_std(f2, rect.y_max, pf.alpha)
        sums = np.empty(n)
        for i in range(n):
            stream = RngStream(seed, i)
            cloud = generate_cloud(stream, rect)
            sums[i] = sum_functional(cloud, pf) + sig * stream.normal(1)[0]
        cf, _ = empirical_cf(sums, thetas)
        worst = 0.0
        for th, emp in zip(thetas, cf):
            closed = cf_closed_form(pf, th, rect).value
            worst = max(worst, abs(emp.real - closed))
        checks.append(CheckResult(
            name=f"cf-check/{name}", statistic=worst,
            threshold=3.0 / math.sqrt(n), passed=worst <= 3.0 / math.sqrt(n),
            n=n, seed=seed))
    return checks


def _suite_reduction(cfg: RunConfig):
    from .processes import (simulate_fbm, simulate_lmmm, simulate_lsfm,
                            simulate_mbm, simulate_multistable_levy,
                            simulate_multistable_rou, simulate_reverse_ou,
                            simulate_stable_levy)
    seed = int(cfg.verify["seed"])
    sim = SimulationConfig(t_grid=(0.0, 0.25, 0.5, 0.75, 1.0), seed=seed)
    pairs = [
        ("multistable_levy=stable_levy",
         simulate_multistable_levy(sim, 1.5, 1.0),
         simulate_stable_levy(sim, 1.5)),
        ("mbm=fbm", simulate_mbm(sim, 0.6, 1.0), simulate_fbm(sim, 0.6)),
        ("multistable_rou=reverse_ou",
         simulate_multistable_rou(sim, 1.0, 1.5),
         simulate_reverse_ou(sim, 1.0, 1.5)),
        ("lmmm=well-balanced-lsfm",
         simulate_lmmm(sim, 1.8, 0.6, 1.0),
         simulate_lsfm(sim, 1.8, 0.6, 1.0, 1.0)),
    ]
    checks = []
    for name, p1, p2 in pairs:
        same = np.array_equal(p1.y, p2.y) and np.array_equal(p1.t, p2.t)
        checks.append(CheckResult(
            name=f"reduction/{name}", statistic=0.0 if same else 1.0,
            threshold=0.0, passed=same, comparator="==", seed=seed))
    return checks


def _suite_sssi(cfg: RunConfig):
    n = int(cfg.verify["n"])
    seed = int(cfg.verify["seed"])
    checks = []
    spec = ProcessSpec(kind="stable_levy", alpha=FuncTable.constant(1.5))
    sim = SimulationConfig(t_grid=(0.5, 1.0), n_paths=2 * n, seed=seed)
    _, y, _ = ensemble(spec, sim)
    d = ks_distance(y[:n, 0] / 0.5 ** (1 / 1.5), y[n:, 1])
    crit = ks_critical(n, n, 0.01)
    checks.append(CheckResult(name="sssi/stable_levy-1.5", statistic=d,
                              threshold=crit, passed=d <= crit, n=n,
                              seed=seed))
    spec = ProcessSpec(kind="fbm", h=FuncTable.constant(0.7))
    sim = SimulationConfig(t_grid=(0.5, 1.0), n_paths=2 * n, seed=seed + 1)
    _, y, _ = ensemble(spec, sim)
    d = ks_distance(y[:n, 0] / 0.5 ** 0.7, y[n:, 1])
    checks.append(CheckResult(name="sssi/fbm-0.7", statistic=d,
                              threshold=crit, passed=d <= crit, n=n,
                              seed=seed + 1))
    return checks


def _lmmm_probe_components(seed: int, u: float = 0.5):
    h = FuncTable.linear(0.5, 0.2)       # h(u) = 0.6 on [0, 1.5]
    alpha = FuncTable.linear(1.7, 0.2)   # alpha(u) = 1.8
    spec = ProcessSpec(kind="lmmm", h=h, alpha=alpha,
                       amplitude=FuncTable.constant(1.0))

    def increments(r, n):
        sim = SimulationConfig(t_grid=(u, u + r), n_paths=n,
                               seed=seed + int(1e6 * r))
        _, y, _ = ensemble(spec, sim)
        return (y[:, 1] - y[:, 0]) / r ** 0.6

    tgt_spec = ProcessSpec(kind="lsfm", alpha=FuncTable.constant(1.8),
                           h=FuncTable.constant(0.6), a_coef=1.0, b_coef=1.0)

    def target(n):
        sim = SimulationConfig(t_grid=(0.0, 1.0), n_paths=n, seed=seed + 77)
        _, y, _ = ensemble(tgt_spec, sim)
        return y[:, 1]

    return spec, increments, target


def _suite_localisability(cfg: RunConfig):
    n = max(400, int(cfg.verify["n"]) // 4)
    seed = int(cfg.verify["seed"])
    _, increments, target = _lmmm_probe_components(seed)
    res = scaling_probe(increments, u=0.5, h_u=0.6, r_list=(0.5, 0.1, 0.02),
                        t_probe=1.0, target_fn=target, n=n)
    return [CheckResult(
        name="localisability/lmmm", statistic=res.ks_values[-1],
        threshold=res.final_critical,
        passed=res.trend_ok and res.final_ok, n=n, seed=seed,
        notes=f"ks trend {['%.4f' % k for k in res.ks_values]}")]


def _suite_moment_scaling(cfg: RunConfig):
    n = int(cfg.verify["n"])
    seed = int(cfg.verify["seed"])
    rect = Rectangle(0.0, 1.0, 200.0)
    pf = PointFunctional(space=lambda x: ((x >= 0) & (x <= 1)).astype(float),
                         alpha=1.5, breakpoints=(0.0, 1.0))
    base = np.empty(n)
    for i in range(n):
        cloud = generate_cloud(RngStream(seed, i), rect)
        base[i] = sum_functional(cloud, pf)

    rows = moment_scaling_check(lambda lam: lam * base, p=0.5, a=1.2)
    worst = max(abs(r["ratio"] / r["expected_ratio"] - 1.0) for r in rows)
    finite = all(r["finite"] for r in rows)
    return [CheckResult(name="moment-scaling/shared-cloud", statistic=worst,
                        threshold=1e-12, passed=worst <= 1e-12 and finite,
                        n=n, seed=seed)]


def _suite_transfer(cfg: RunConfig):
    n = int(cfg.verify["n"])
    seed = int(cfg.verify["seed"])
    h = FuncTable.linear(0.5, 0.2)
    alpha = FuncTable.linear(1.7, 0.2)
    spec = ProcessSpec(kind="lmmm", h=h, alpha=alpha)
    u = 0.5
    sim = SimulationConfig(t_grid=(0.0, 1.0), seed=seed)

    def pair_fn(v, uu, m):
        return field_pair_sampler(spec, sim, v, uu, m)

    rows = transfer_condition_probe(pair_fn, u, eta=0.8,
                                    v_list=(0.7, 0.6, 0.55), n=n)
    # probabilities should decrease with |v - u| within binomial noise
    worst = 0.0
    for r1, r2 in zip(rows[:-1], rows[1:]):
        # rows are ordered by decreasing |v-u|
        worst = max(worst, r2["probability"] - r1["probability"]
                    - 2.0 * (r1["se"] + r2["se"]))
    return [CheckResult(name="transfer-condition/lmmm", statistic=worst,
                        threshold=0.0, passed=worst <= 0.0, n=n, seed=seed,
                        notes=" ".join("p(%g)=%.4f" % (r["dist"], r["probability"])
                                       for r in rows))]


_SUITE_FNS = {
    "cf-check": _suite_cf_check,
    "reduction": _suite_reduction,
    "sssi": _suite_sssi,
    "localisability": _suite_localisability,
    "moment-scaling": _suite_moment_scaling,
    "transfer-condition": _suite_transfer,
}


def run_verify(cfg: RunConfig, suites, out_dir: str) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = DiagnosticReport()
    for name in suites:
        fn = _SUITE_FNS.get(name)
        if fn is None:
            print(f"unknown check suite {name!r}; known: {', '.join(SUITES)}",
                  file=sys.stderr)
            return 2
        for check in fn(cfg):
            report.add(check)
    _write(out / "report.json", json.dumps(report.to_json(), sort_keys=True,
                                           indent=1))
    _write(out / "report.txt", report.to_text() + "\n")
    _write(out / "report.csv", report.to_csv())
    print(report.to_text(), file=sys.stderr)
    return 0 if report.passed else 1


# ----------------------------------------------------------------------
# estimate
# ----------------------------------------------------------------------

def _load_path_matrix(paths):
    mats = []
    grid = None
    for p in paths:
        sp = SamplePath.from_csv(Path(p).read_text())
        if grid is None:
            grid = sp.t
        elif len(grid) != len(sp.t) or not np.allclose(grid, sp.t):
            raise ValueError(f"{p}: time grid differs from the first file")
        mats.append(sp.y)
    if grid is None:
        raise ValueError("no input paths")
    return grid, np.vstack(mats)


def run_estimate(cfg: RunConfig, paths_glob, out_dir: str) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    u_list = cfg.estimate["u_list"]
    window = float(cfg.estimate["window"])
    if not u_list:
        print("estimate.u_list is empty", file=sys.stderr)
        return 2

    if paths_glob:
        import glob as _glob
        files = sorted(_glob.glob(paths_glob))
        if not files:
            print(f"no files match {paths_glob!r}", file=sys.stderr)
            return 2
        grid, mat = _load_path_matrix(files)
    else:
        # generate an ensemble whose grid contains each probe point and
        # dyadic offsets inside the window
        pts = set()
        for u in u_list:
            pts.add(float(u))
            for k in range(6):
                pts.add(float(u) + window * 2.0 ** (-k))
        base = list(cfg.simulation.t_grid)
        pts.update(base)
        sim = replace(cfg.simulation, t_grid=tuple(sorted(pts)),
                      n_paths=int(cfg.estimate.get("n_paths", 500)))
        grid, mat, _ = ensemble(cfg.process, sim)

    rows = []
    for u in u_list:
        h_hat, det = estimate_h(grid, mat, float(u), window)
        iu = int(np.argmin(np.abs(grid - u)))
        js = np.where((grid - grid[iu] > 0)
                      & (grid - grid[iu] <= window + 1e-12))[0]
        d = (mat[:, js[0]] - mat[:, iu]) if len(js) else None
        try:
            a_hat = estimate_alpha(d) if d is not None and len(d) >= 1000 \
                else det.get("alpha_hat")
        except ValueError:
            a_hat = det.get("alpha_hat")
        rows.append({"u": float(u), "h_hat": h_hat, "alpha_hat": a_hat,
                     "p": det["p"], "n_paths": int(mat.shape[0])})

    _write(out / "estimates.json",
           json.dumps({"schema_version": 1, "estimates": rows},
                      sort_keys=True, indent=1))
    csv = ["u,h_hat,alpha_hat,p,n_paths"]
    for r in rows:
        csv.append(f"{float(r['u'])!r},{float(r['h_hat'])!r},"
                   f"{(None if r['alpha_hat'] is None else float(r['alpha_hat']))!r},"
                   f"{float(r['p'])!r},{r['n_paths']}")
    _write(out / "estimates.csv", "\n".join(csv) + "\n")
    print(f"wrote estimates for {len(rows)} probe points to {out}")
    return 0


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="multistable",
        description="simulation and verification of localisable, "
                    "multifractional and multistable processes")
    parser.add_argument("--threads", type=int, default=_default_threads(),
                        help="worker threads over replicas "
                             "(env MULTISTABLE_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate sample paths")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)

    p_ver = sub.add_parser("verify", help="run verification suites")
    p_ver.add_argument("--config", required=True)
    p_ver.add_argument("--suite", default=",".join(SUITES),
                       help=f"comma-separated subset of: {', '.join(SUITES)}")
    p_ver.add_argument("--out", required=True)

    p_est = sub.add_parser("estimate", help="estimate h(u) and alpha(u)")
    p_est.add_argument("--config", required=True)
    p_est.add_argument("--paths", default=None,
                       help="glob of SamplePath CSVs (default: simulate)")
    p_est.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "simulate":
            return run_simulate(cfg, args.out, threads=args.threads)
        if args.command == "verify":
            suites = [s.strip() for s in args.suite.split(",") if s.strip()]
            return run_verify(cfg, suites, args.out)
        if args.command == "estimate":
            try:
                return run_estimate(cfg, args.paths, args.out)
            except (ValueError, OSError) as exc:
                print(f"estimate input error: {exc}", file=sys.stderr)
                return 2
    except (ConfigError,) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (MemoryError, RuntimeError) as exc:
        print(f"simulation failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
