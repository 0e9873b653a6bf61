"""Statistical verification layer.

Empirical characteristic functions, two-sample KS machinery, the
localisability scaling probe, the diagonal-field transfer probe, moment
scaling checks, and the two calibrated estimators (stability index via
ECF regression, local regularity via adaptive-order variogram slopes).
Everything here is a pure function of its input samples; ensembles are
generated upstream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

# Constants of the Kolmogorov null distribution (mean and sd of K, where
# the two-sample statistic is approximately K / sqrt(n_eff)).
_K_MEAN = 0.8687
_K_SD = 0.2603

_KS_COEF = {0.10: 1.224, 0.05: 1.358, 0.01: 1.628}


def empirical_cf(samples, thetas):
    """(1/N) sum exp(i theta X_k) per theta, with 1/sqrt(N) standard error."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample")
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    phase = np.exp(1j * np.outer(th, x))
    cf = phase.mean(axis=1)
    se = np.full(len(th), 1.0 / math.sqrt(x.size))
    return cf, se


def ks_distance(sample_a, sample_b) -> float:
    """Sup-difference of the two empirical CDFs."""
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    allv = np.concatenate([a, b])
    ca = np.searchsorted(a, allv, side="right") / a.size
    cb = np.searchsorted(b, allv, side="right") / b.size
    return float(np.max(np.abs(ca - cb)))


def ks_critical(n: int, m: Optional[int] = None, level: float = 0.01) -> float:
    """Two-sample KS critical value at the 1%, 5% or 10% level."""
    m = n if m is None else m
    try:
        coef = _KS_COEF[level]
    except KeyError:
        raise ValueError(f"level must be one of {sorted(_KS_COEF)}") from None
    return coef * math.sqrt((n + m) / (n * m))


def ks_null_sd(n: int, m: Optional[int] = None) -> float:
    """Approximate sd of the two-sample KS statistic under the null."""
    m = n if m is None else m
    return _K_SD * math.sqrt((n + m) / (n * m))


@dataclass
class ScalingProbeResult:
    u: float
    r_list: tuple
    ks_values: tuple
    se_band: float
    final_critical: float
    trend_ok: bool
    final_ok: bool
    n: int

    @property
    def passed(self) -> bool:
        return self.trend_ok

    def to_json(self) -> dict:
        return {
            "u": self.u, "r_list": list(self.r_list),
            "ks": list(self.ks_values), "se_band": self.se_band,
            "final_critical": self.final_critical,
            "trend_ok": self.trend_ok, "final_ok": self.final_ok,
            "n": self.n,
        }


def scaling_probe(increment_fn: Callable[[float, int], np.ndarray],
                  u: float, h_u: float, r_list: Sequence[float],
                  t_probe: float,
                  target_fn: Callable[[int], np.ndarray],
                  n: int) -> ScalingProbeResult:
    """Localisability probe: KS of scaled increments against the local form.

    increment_fn(r, n) must return n independent samples of
    (Y(u + r t_probe) - Y(u)) / r^h_u; target_fn(n) returns n independent
    samples of the claimed local-form value at t_probe.  The verdict is
    'KS nonincreasing along the decreasing r grid within a 2 sd null band'
    (the convergence has no proven rate, so only the trend is checked),
    plus a final-scale comparison against twice the 1% critical value.
    """
    r = [float(v) for v in r_list]
    if not all(r[i] > r[i + 1] for i in range(len(r) - 1)):
        raise ValueError("r_list must be strictly decreasing")
    ks_vals = []
    for ri in r:
        inc = np.asarray(increment_fn(ri, n), dtype=float)
        tgt = np.asarray(target_fn(n), dtype=float)
        ks_vals.append(ks_distance(inc, tgt))
    band = 2.0 * ks_null_sd(n, n)
    trend_ok = all(ks_vals[i + 1] <= ks_vals[i] + band
                   for i in range(len(ks_vals) - 1))
    final_crit = 2.0 * ks_critical(n, n, 0.01)
    return ScalingProbeResult(
        u=u, r_list=tuple(r), ks_values=tuple(ks_vals), se_band=band,
        final_critical=final_crit, trend_ok=trend_ok,
        final_ok=ks_vals[-1] <= final_crit, n=n)


def transfer_condition_probe(pair_fn: Callable[[float, float, int], tuple],
                             u: float, eta: float,
                             v_list: Sequence[float], n: int):
    """Empirical P(|X(v,v) - X(v,u)| >= |v-u|^eta) per v.

    pair_fn(v, u, n) returns n paired draws of the two field values
    evaluated on a common cloud.  Returns a list of row dicts with the
    probability and its binomial standard error.
    """
    if eta <= 0:
        raise ValueError("eta must be > 0")
    rows = []
    for v in v_list:
        if v == u:
            raise ValueError("transfer probe needs v != u")
        xvv, xvu = pair_fn(float(v), float(u), n)
        thresh = abs(v - u) ** eta
        p_hat = float(np.mean(np.abs(np.asarray(xvv) - np.asarray(xvu))
                              >= thresh))
        se = math.sqrt(max(p_hat * (1 - p_hat), 1.0 / n) / n)
        rows.append({"v": float(v), "dist": abs(v - u), "threshold": thresh,
                     "probability": p_hat, "se": se, "n": n})
    return rows


def estimate_alpha(samples, cf_band=(0.3, 0.9), n_theta: int = 200) -> float:
    """Stability index via regression of log(-log |ecf|) on log theta.

    The theta grid is auto-selected where the empirical CF modulus lies
    inside cf_band.  The default band starts at 0.3 rather than deeper in
    the tail because simulated series carry a Gaussian completion of
    their small jumps, which contaminates the CF at large theta.  Result
    is clamped to (0, 2].
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 1000:
        raise ValueError("need at least 1000 samples")
    if np.all(x == x[0]):
        raise ValueError("degenerate sample (all values equal)")
    q25, q75 = np.percentile(x, [25, 75])
    scale = max((q75 - q25) / 2.0, 1e-12)
    thetas = np.geomspace(1e-3, 1e3, n_theta) / scale
    cf, _ = empirical_cf(x, thetas)
    mod = np.abs(cf)
    sel = (mod >= cf_band[0]) & (mod <= cf_band[1])
    if sel.sum() < 5:
        sel = (mod >= 0.05) & (mod <= 0.95)
    if sel.sum() < 3:
        raise ValueError("could not find a usable theta band")
    lx = np.log(thetas[sel])
    ly = np.log(-np.log(mod[sel]))
    slope = float(np.polyfit(lx, ly, 1)[0])
    return min(2.0, max(slope, 0.05))


def estimate_h(t_grid, paths, u: float, window: float,
               p: Optional[float] = None, n_r: int = 6):
    """Local regularity from the scaling of low-order increment moments.

    Regresses log E|Y(u+r) - Y(u)|^p on log r over up to n_r grid
    offsets inside (0, window]; the moment order defaults to
    min(1, 0.9 alpha_hat)/2 so it stays finite under heavy tails.
    Returns (h_hat, details dict).
    """
    t = np.asarray(t_grid, dtype=float)
    y = np.asarray(paths, dtype=float)
    if y.ndim != 2 or y.shape[1] != t.size:
        raise ValueError("paths must be a (n_paths, len(t_grid)) matrix")
    if y.shape[0] < 200:
        raise ValueError("need at least 200 paths")
    iu = int(np.argmin(np.abs(t - u)))
    if abs(t[iu] - u) > 1e-9:
        raise ValueError(f"u={u} is not a grid point")
    offsets = t - t[iu]
    usable = np.where((offsets > 0) & (offsets <= window + 1e-12))[0]
    if usable.size < 3:
        raise ValueError("need at least 3 grid points inside the window")
    if usable.size > n_r:
        pick = np.unique(np.geomspace(1, usable.size, n_r).astype(int) - 1)
        usable = usable[pick]
    r = offsets[usable]
    d = y[:, usable] - y[:, [iu]]
    if p is None:
        a_hat = estimate_alpha(d[:, 0]) if y.shape[0] >= 1000 else \
            estimate_alpha(np.concatenate([d[:, j] for j in range(d.shape[1])]))
        p = min(1.0, 0.9 * a_hat) / 2.0
    else:
        a_hat = None
    m = np.mean(np.abs(d) ** p, axis=0)
    if np.any(m <= 0):
        raise ValueError("degenerate increments in the window")
    slope, intercept = np.polyfit(np.log(r), np.log(m), 1)
    h_hat = float(slope / p)
    return h_hat, {"p": p, "alpha_hat": a_hat, "r": r.tolist(),
                   "moments": m.tolist(), "intercept": float(intercept)}


def moment_scaling_check(sampler: Callable[[float], np.ndarray], p: float,
                         a: float, scales=(1.0, 2.0, 4.0)):
    """Empirical E|Sigma(scale . f)|^p at several envelope scales.

    sampler(scale) must evaluate the scaled functional on COMMON clouds,
    so the ratios are exactly scale^p by linearity of the sum.  Requires
    p < a (the moment may be infinite otherwise).
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    if p >= a:
        raise ValueError(f"need p < a for a finite moment, got p={p}, a={a}")
    rows = []
    base = None
    for lam in scales:
        s = np.asarray(sampler(float(lam)), dtype=float)
        if not np.all(np.isfinite(s)):
            raise ValueError("sampler returned non-finite sums")
        mom = float(np.mean(np.abs(s) ** p))
        if base is None:
            base = mom
        rows.append({"scale": float(lam), "moment": mom,
                     "ratio": mom / base if base > 0 else math.inf,
                     "expected_ratio": float(lam) ** p,
                     "finite": bool(np.isfinite(mom))})
    return rows


# ----------------------------------------------------------------------
# diagnostic reports
# ----------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool
    comparator: str = "<="
    n: int = 0
    seed: int = 0
    notes: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "statistic": float(self.statistic),
                "threshold": float(self.threshold),
                "comparator": self.comparator, "passed": bool(self.passed),
                "n": int(self.n), "seed": int(self.seed),
                "notes": self.notes}


@dataclass
class DiagnosticReport:
    checks: list = field(default_factory=list)
    notes: str = ""

    def add(self, check: CheckResult):
        self.checks.append(check)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"schema_version": 1, "passed": self.passed,
                "notes": self.notes,
                "checks": [c.to_json() for c in self.checks]}

    def to_text(self) -> str:
        lines = []
        width = max((len(c.name) for c in self.checks), default=10)
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(
                f"[{status}] {c.name:<{width}}  stat={c.statistic:.6g} "
                f"{c.comparator} {c.threshold:.6g}  n={c.n} seed={c.seed}"
                + (f"  ({c.notes})" if c.notes else ""))
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'} "
                     f"({sum(c.passed for c in self.checks)}/{len(self.checks)})")
        return "\n".join(lines)

    def to_csv(self) -> str:
        out = ["name,statistic,comparator,threshold,passed,n,seed,notes"]
        for c in self.checks:
            out.append(f"{c.name},{float(c.statistic)!r},{c.comparator},"
                       f"{float(c.threshold)!r},{int(c.passed)},{c.n},{c.seed},"
                       f"\"{c.notes}\"")
        return "\n".join(out) + "\n"
