"""Sample-path simulators for every process family.

Two representations cover everything:

* Gaussian kinds (fbm, mbm) are grid-discretized moving-average integrals
  against one Wiener realization per path: uniform cells over the kernel's
  structured zone, geometric cells in the far field, midpoint kernel
  values, increments sqrt(dx) Z.

* Stable kinds are truncated symmetric Poisson series over one point
  cloud per path, normalized where the construction demands by the series
  constant c*(alpha), plus (by default) a Gaussian completion of the
  compensated small-jump region |y| > kappa(x).  The completion is itself
  a discretized Wiener integral sharing one normal block per path, so the
  whole path remains a deterministic function of (seed, stream_id) and
  the truncation geometry.

Truncation geometry depends only on the time RANGE and the declared
parameter-table bounds, never on interior grid points, so refining the
evaluation grid leaves existing values bit-identical.  All constant-
parameter reductions (multistable kinds at frozen parameters vs their
single-stability counterparts) run through literally the same code path
and are bit-exact.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaincc

from .functables import FuncTable, as_table
from .kernels import (
    DivergentNormError,
    KernelSpec,
    QuadConfig,
    _eval_family,
    series_normalizer,
)
from .poisson import Rectangle, generate_cloud, tail_variance_rate
from .rng import RngStream

SCHEMA_VERSION = 1

POISSON_KINDS = {
    "stable_levy": dict(family="indicator", alpha_mode="const", c=True,
                        amp=False),
    "lsfm": dict(family="lsfm_kernel", alpha_mode="const", c=True, amp=False),
    "lmsm": dict(family="lsfm_kernel", alpha_mode="const", c=True, amp=False,
                 h_mode="table"),
    "moving_average": dict(family="user_table", alpha_mode="const", c=True,
                           amp=False),
    "reverse_ou": dict(family="exp_ou_kernel", alpha_mode="const", c=False,
                       amp=False),
    "multistable_levy": dict(family="indicator", alpha_mode="table", c=True,
                             amp=True),
    "lmmm": dict(family="lsfm_kernel", alpha_mode="table", c=True, amp=True,
                 h_mode="table", well_balanced=True),
    "log_fractional_msm": dict(family="log_kernel", alpha_mode="table",
                               c=False, amp=True, alpha_open=(1.0, 2.0)),
    "multistable_rou": dict(family="exp_ou_kernel", alpha_mode="table",
                            c=False, amp=False, alpha_open=(1.0, 2.0)),
    "multistable_diagonal": dict(family=None, alpha_mode="table", c=None,
                                 amp=True),
}

GAUSSIAN_KINDS = ("fbm", "mbm")

KINDS = tuple(GAUSSIAN_KINDS) + tuple(POISSON_KINDS)


class ConfigError(ValueError):
    """Invalid process or simulation configuration."""


class GridError(RuntimeError):
    """Discretization grid cannot satisfy the requested settings."""


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationConfig:
    """Controls for the Poisson-cloud truncation.

    jump_tol is the magnitude resolution delta: every kernel jump larger
    than roughly delta (in kernel units, before amplitude factors) is
    represented by an explicit cloud point, smaller ones go to the
    Gaussian completion.  spike_resolution is the distance down to which
    moving singularities of unbounded kernels are resolved; tail_tol the
    stable scale of the dropped far x-tail.
    """

    jump_tol: float = 0.01
    spike_resolution: float = 1e-4
    tail_tol: float = 1e-3
    band_pad: float = 1.0
    y_max: Optional[float] = None          # explicit single-rectangle mode
    x_extent: Optional[Tuple[float, float]] = None
    max_expected_points: float = 1e8
    gaussian_completion: bool = True
    band_comp_cells: int = 1024
    far_comp_cells: int = 32


@dataclass(frozen=True)
class WienerConfig:
    dx: float = 1e-3
    x_max: Optional[float] = None
    tail_tol: float = 1e-3
    far_ratio: float = 1.1
    max_cells: int = 8_000_000


@dataclass(frozen=True)
class SimulationConfig:
    t_grid: Tuple[float, ...]
    n_paths: int = 1
    seed: int = 0
    stream_offset: int = 0
    truncation: TruncationConfig = field(default_factory=TruncationConfig)
    wiener: WienerConfig = field(default_factory=WienerConfig)
    quad: QuadConfig = field(default_factory=QuadConfig)

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        if t.size == 0:
            raise ConfigError("t_grid must be nonempty")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ConfigError("t_grid must be strictly increasing")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1")
        object.__setattr__(self, "t_grid", tuple(float(v) for v in t))

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.t_grid, dtype=float)


@dataclass
class ProcessSpec:
    kind: str
    h: Optional[FuncTable] = None
    alpha: Optional[FuncTable] = None
    amplitude: Optional[FuncTable] = None
    a_coef: float = 1.0
    b_coef: float = 0.0
    decay: float = 1.0
    kernel_table: Optional[FuncTable] = None
    c_factor: Optional[bool] = None   # only consulted by multistable_diagonal
    kernel_family: Optional[str] = None  # ditto

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown process kind {self.kind!r}")
        if self.h is not None:
            self.h = as_table(self.h)
        if self.alpha is not None:
            self.alpha = as_table(self.alpha)
        if self.amplitude is not None:
            self.amplitude = as_table(self.amplitude)
        if self.kernel_table is not None:
            self.kernel_table = as_table(self.kernel_table)

    # -- derived info ---------------------------------------------------

    def family(self) -> Optional[str]:
        if self.kind in GAUSSIAN_KINDS:
            return "fbm_kernel"
        info = POISSON_KINDS[self.kind]
        fam = info["family"] or self.kernel_family
        if fam is None:
            raise ConfigError("multistable_diagonal needs kernel_family")
        return fam

    def uses_c(self) -> bool:
        info = POISSON_KINDS[self.kind]
        if info["c"] is None:
            return True if self.c_factor is None else bool(self.c_factor)
        return info["c"]

    def coefs(self) -> Tuple[float, float]:
        if self.kind == "lmmm":
            return (1.0, 1.0)   # well-balanced by construction
        return (self.a_coef, self.b_coef)

    def validate(self, t_lo: float, t_hi: float):
        kind = self.kind
        if kind in GAUSSIAN_KINDS:
            if self.h is None:
                raise ConfigError(f"{kind} requires h")
            lo, hi = self.h.bounds(t_lo, t_hi)
            if not (0.0 < lo and hi < 1.0):
                raise ConfigError(
                    f"h(t) must stay in (0,1); declared range [{lo}, {hi}]")
            return
        info = POISSON_KINDS[kind]
        if self.alpha is None:
            raise ConfigError(f"{kind} requires alpha")
        a_lo, a_hi = self.alpha.bounds(t_lo, t_hi)
        lo_req, hi_req = info.get("alpha_open", (0.0, 2.0))
        if not (lo_req < a_lo and a_hi < hi_req):
            raise ConfigError(
                f"alpha(t) must stay in ({lo_req},{hi_req}) for {kind}; "
                f"declared range [{a_lo}, {a_hi}]")
        fam = self.family()
        if fam == "lsfm_kernel":
            if self.h is None:
                raise ConfigError(f"{kind} requires h")
            h_lo, h_hi = self.h.bounds(t_lo, t_hi)
            if not (0.0 < h_lo and h_hi < 1.0):
                raise ConfigError(
                    f"h(t) must stay in (0,1); declared range [{h_lo}, {h_hi}]")
            a, b = self.coefs()
            if a == 0.0 and b == 0.0:
                raise ConfigError("(a_coef, b_coef) must not both be zero")
            e_lo = h_lo - 1.0 / a_lo
            if 1.0 + e_lo * a_lo <= 0.0:
                raise DivergentNormError(
                    "kernel exponent range reaches the non-integrable "
                    f"regime (h - 1/alpha <= -1/alpha): e_lo={e_lo}")
        if fam == "exp_ou_kernel" and not self.decay > 0:
            raise ConfigError("decay (lambda) must be > 0")
        if fam == "user_table" and self.kernel_table is None:
            raise ConfigError(f"{kind} requires kernel_table")

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        for name in ("h", "alpha", "amplitude", "kernel_table"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v.to_json()
        for name in ("a_coef", "b_coef", "decay"):
            v = getattr(self, name)
            if v != ProcessSpec.__dataclass_fields__[name].default:
                d[name] = v
        if self.c_factor is not None:
            d["c_factor"] = self.c_factor
        if self.kernel_family is not None:
            d["kernel_family"] = self.kernel_family
        return d

    @staticmethod
    def from_json(obj: dict) -> "ProcessSpec":
        kw = dict(obj)
        kind = kw.pop("kind", None)
        if kind is None:
            raise ConfigError("process spec needs a 'kind'")
        for name in ("h", "alpha", "amplitude", "kernel_table"):
            if name in kw:
                kw[name] = FuncTable.from_json(kw[name])
        try:
            return ProcessSpec(kind=kind, **kw)
        except TypeError as exc:
            raise ConfigError(f"bad process spec: {exc}") from None


@dataclass
class SamplePath:
    t: np.ndarray
    y: np.ndarray
    meta: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
        for key in sorted(self.meta):
            buf.write(f"# {key}: {json.dumps(self.meta[key], sort_keys=True)}\n")
        buf.write("t,y\n")
        for ti, yi in zip(self.t, self.y):
            buf.write(f"{float(ti)!r},{float(yi)!r}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "SamplePath":
        meta = {}
        ts, ys = [], []
        seen_header = False
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, val = body.split(":", 1)
                    try:
                        meta[key.strip()] = json.loads(val.strip())
                    except json.JSONDecodeError:
                        meta[key.strip()] = val.strip()
                continue
            if line == "t,y":
                seen_header = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"malformed CSV row: {line!r}")
            ts.append(float(parts[0]))
            ys.append(float(parts[1]))
        if not seen_header or not ts:
            raise ValueError("not a sample-path CSV (missing 't,y' header or data)")
        return SamplePath(t=np.array(ts), y=np.array(ys), meta=meta)


# ----------------------------------------------------------------------
# envelope and tiers for the Poisson engine
# ----------------------------------------------------------------------

@dataclass
class _TailRule:
    kind: str        # 'power' (in |x|) or 'exp' (distance past band edge)
    coef: float
    expo: float      # power exponent or exp rate

    def value(self, u: float) -> float:
        if self.kind == "power":
            return self.coef * u ** self.expo
        return self.coef * math.exp(-self.expo * u)

    def norm_tail(self, u: float, q: float) -> float:
        """(int_{beyond u} value^q)^(1/q) stopping rule."""
        if self.kind == "power":
            g = q * self.expo + 1.0
            if g >= 0:
                raise DivergentNormError("far tail not q-integrable")
            return (self.coef ** q * u ** g / (-g)) ** (1.0 / q)
        return (self.coef ** q * math.exp(-q * self.expo * u)
                / (q * self.expo)) ** (1.0 / q)


@dataclass
class _Envelope:
    band_lo: float
    band_hi: float
    cap: float
    left: Optional[_TailRule]
    right: Optional[_TailRule]
    spike_scale: float = 0.0     # documented stable scale of unresolved spikes


def _log_spike_scale(d_min: float, alpha_lo: float) -> float:
    # (2 int_0^d |ln u|^a du)^(1/a) = (2 Gamma(a+1, ln 1/d))^(1/a)
    l = math.log(1.0 / min(d_min, 0.5))
    val = 2.0 * gammaincc(alpha_lo + 1.0, l) * math.gamma(alpha_lo + 1.0)
    return val ** (1.0 / alpha_lo)


def _build_envelope(spec: ProcessSpec, t_lo: float, t_hi: float,
                    trunc: TruncationConfig,
                    alpha_bounds: Tuple[float, float],
                    e_bounds: Optional[Tuple[float, float]]) -> _Envelope:
    fam = spec.family()
    lo0, hi0 = min(0.0, t_lo), max(0.0, t_hi)
    a_lo, _ = alpha_bounds

    if fam == "indicator":
        return _Envelope(lo0, hi0, 1.0, None, None)

    if fam == "exp_ou_kernel":
        return _Envelope(t_lo, t_hi, 1.0, None,
                         _TailRule("exp", 1.0, spec.decay))

    if fam == "user_table":
        s_lo, s_hi = spec.kernel_table.support()
        cap = spec.kernel_table.abs_max(s_lo, s_hi)
        return _Envelope(t_lo - s_hi, t_hi - s_lo, cap, None, None)

    t_span = max(abs(t_lo), abs(t_hi), 1e-6)
    pad = max(trunc.band_pad, 1.0)
    band_lo = min(lo0 - pad, -max(2.0 * t_span, 1.0))
    band_hi = max(hi0 + pad, max(2.0 * t_span, 1.0))
    width = band_hi - band_lo

    if fam == "log_kernel":
        d_min = trunc.spike_resolution
        cap = 2.0 * (abs(math.log(d_min)) + math.log(2.0 + width))
        rule = _TailRule("power", 2.0 * t_span, -1.0)
        return _Envelope(band_lo, band_hi, cap, rule, rule,
                         spike_scale=_log_spike_scale(d_min, a_lo))

    # lsfm family
    e_lo, e_hi = e_bounds
    a, b = spec.coefs()
    amp_sum = abs(a) + abs(b)
    d_min = trunc.spike_resolution
    m_spike = d_min ** e_lo if e_lo < 0 else 1.0
    m_far = max(1.0, (2.0 + width) ** max(e_hi, 0.0))
    cap = 2.0 * amp_sum * max(m_spike, m_far)
    e_max = max(abs(e_lo), abs(e_hi), 1e-12)
    coef = e_max * 2.0 ** (1.0 - min(e_lo, 0.0)) * t_span
    left = _TailRule("power", abs(a) * coef, e_hi - 1.0) if a != 0 else None
    right = _TailRule("power", abs(b) * coef, e_hi - 1.0) if b != 0 else None
    spike = 0.0
    if e_lo < 0:
        g = 1.0 + e_lo * a_lo
        if g <= 0:
            raise DivergentNormError("kernel spikes are not alpha-integrable")
        spike = amp_sum * (2.0 * d_min ** g / g) ** (1.0 / a_lo)
    return _Envelope(band_lo, band_hi, cap, left, right, spike_scale=spike)


@dataclass
class _TierSet:
    rects: list                   # [(Rectangle, kappa)]
    comp_mid: np.ndarray
    comp_w: np.ndarray
    comp_kappa: np.ndarray
    cap: float
    provenance: dict


def _kappa_for(magnitude: float, delta: float,
               alpha_bounds: Tuple[float, float]) -> float:
    if magnitude <= 0.0:
        return 0.0
    r = magnitude / delta
    a_lo, a_hi = alpha_bounds
    return max(r ** a_lo, r ** a_hi)


def _build_tiers(env: _Envelope, alpha_bounds: Tuple[float, float],
                 trunc: TruncationConfig) -> _TierSet:
    delta = trunc.jump_tol
    a_lo, _ = alpha_bounds
    rects = []
    prov = {"mode": "tiered", "spike_scale": env.spike_scale}

    band_lo, band_hi = env.band_lo, env.band_hi
    if trunc.x_extent is not None:
        band_lo, band_hi = trunc.x_extent
    if trunc.y_max is not None:
        rects.append((Rectangle(band_lo, band_hi, trunc.y_max), trunc.y_max))
        prov.update(mode="rectangle", y_max=trunc.y_max)
    else:
        if band_hi > band_lo:
            kappa = _kappa_for(env.cap, delta, alpha_bounds)
            rects.append((Rectangle(band_lo, band_hi, kappa), kappa))
        for side, rule in (("left", env.left), ("right", env.right)):
            if rule is None:
                continue
            edge = abs(band_lo) if side == "left" else abs(band_hi)
            u = edge if rule.kind == "power" else 0.0
            dropped = None
            for _ in range(400):
                if rule.norm_tail(u, a_lo) < trunc.tail_tol:
                    dropped = rule.norm_tail(u, a_lo)
                    break
                u_next = u * 2.0 if rule.kind == "power" else u + 2.0 / rule.expo
                mag = rule.value(u)
                kappa = _kappa_for(mag, delta, alpha_bounds)
                if kappa > 0.0:
                    if side == "left":
                        r = Rectangle(-u_next if rule.kind == "power"
                                      else band_lo - u_next,
                                      -u if rule.kind == "power"
                                      else band_lo - u, kappa)
                    else:
                        r = Rectangle(u if rule.kind == "power"
                                      else band_hi + u,
                                      u_next if rule.kind == "power"
                                      else band_hi + u_next, kappa)
                    rects.append((r, kappa))
                u = u_next
            prov[f"dropped_tail_{side}"] = dropped if dropped is not None \
                else rule.norm_tail(u, a_lo)

    total = sum(r.area for r, _ in rects)
    if total > trunc.max_expected_points:
        raise MemoryError(
            f"expected cloud size {total:.3g} exceeds cap "
            f"{trunc.max_expected_points:.3g}; loosen jump_tol or tail_tol")
    prov.update(n_tiers=len(rects), expected_points=total)

    mids, ws, kaps = [], [], []
    if trunc.gaussian_completion:
        for i, (r, kappa) in enumerate(rects):
            n_cells = trunc.band_comp_cells if i == 0 else trunc.far_comp_cells
            edges = np.linspace(r.x_lo, r.x_hi, n_cells + 1)
            mids.append(0.5 * (edges[:-1] + edges[1:]))
            ws.append(np.diff(edges))
            kaps.append(np.full(n_cells, kappa))
    comp_mid = np.concatenate(mids) if mids else np.empty(0)
    comp_w = np.concatenate(ws) if ws else np.empty(0)
    comp_kappa = np.concatenate(kaps) if kaps else np.empty(0)
    return _TierSet(rects, comp_mid, comp_w, comp_kappa, env.cap, prov)


# ----------------------------------------------------------------------
# engines
# ----------------------------------------------------------------------

class _PoissonEngine:
    def __init__(self, spec: ProcessSpec, cfg: SimulationConfig):
        t = cfg.times
        t_lo, t_hi = float(t[0]), float(t[-1])
        spec.validate(t_lo, t_hi)
        self.spec = spec
        self.cfg = cfg
        self.t = t
        fam = spec.family()
        self.kspec = KernelSpec(
            family=fam,
            a_coef=spec.coefs()[0],
            b_coef=spec.coefs()[1],
            decay=spec.decay,
            table=spec.kernel_table,
        )
        alpha_b = spec.alpha.bounds(t_lo, t_hi)
        self.alpha_t = np.asarray(spec.alpha(t), dtype=float) + np.zeros_like(t)
        e_bounds = None
        self.e_t = None
        if fam == "lsfm_kernel":
            h_b = spec.h.bounds(t_lo, t_hi)
            h_t = np.asarray(spec.h(t), dtype=float) + np.zeros_like(t)
            self.e_t = h_t - 1.0 / self.alpha_t
            e_bounds = (h_b[0] - 1.0 / alpha_b[0], h_b[1] - 1.0 / alpha_b[1])
        amp = np.ones_like(t)
        if spec.amplitude is not None:
            amp = np.asarray(spec.amplitude(t), dtype=float) + np.zeros_like(t)
        cf = np.ones_like(t)
        if spec.uses_c():
            cf = np.array([series_normalizer(av) for av in self.alpha_t])
        self.scale_t = amp * cf

        env = _build_envelope(spec, t_lo, t_hi, cfg.truncation, alpha_b, e_bounds)
        self.tiers = _build_tiers(env, alpha_b, cfg.truncation)
        self.completion = (cfg.truncation.gaussian_completion
                           and len(self.tiers.comp_mid) > 0)
        if self.completion:
            self._sqrt_w = np.sqrt(self.tiers.comp_w)

    # draw order per path: tier clouds (count, xs, ys) then completion normals
    def _draw(self, stream: RngStream):
        xs, ys = [], []
        for rect, _ in self.tiers.rects:
            cl = generate_cloud(stream, rect,
                                max_expected=self.cfg.truncation.max_expected_points)
            xs.append(cl.x)
            ys.append(cl.y)
        x = np.concatenate(xs) if xs else np.empty(0)
        y = np.concatenate(ys) if ys else np.empty(0)
        if len(y):
            order = np.argsort(-np.abs(y), kind="stable")
            x, y = x[order], y[order]
        z = stream.normal(len(self.tiers.comp_mid)) if self.completion else None
        return x, y, z

    def _point_sums(self, t_vals, x, y, alpha_vals, e_vals) -> np.ndarray:
        """Per time: sum over cloud points of f(t, x) sign(y)|y|^(-1/alpha)."""
        out = np.zeros(len(t_vals))
        if len(y) == 0:
            return out
        ay = np.abs(y)
        sy = np.sign(y)
        pw_cache = {}
        for j, tj in enumerate(t_vals):
            av = float(alpha_vals[j])
            if av not in pw_cache:
                pw_cache[av] = sy * ay ** (-1.0 / av)
            ker = _eval_family(self.kspec, float(tj),
                               None if e_vals is None else e_vals[j], x)
            out[j] = float(np.dot(ker, pw_cache[av]))
        return out

    def _completion_sums(self, t_vals, z, alpha_vals, e_vals) -> np.ndarray:
        out = np.zeros(len(t_vals))
        if not self.completion:
            return out
        mid, kap = self.tiers.comp_mid, self.tiers.comp_kappa
        cap = self.tiers.cap
        alive = kap > 0.0
        v_cache = {}
        for j, tj in enumerate(t_vals):
            av = float(alpha_vals[j])
            if av not in v_cache:
                v = np.zeros_like(kap)
                v[alive] = (2.0 * av / (2.0 - av)
                            * kap[alive] ** (-(2.0 - av) / av))
                v_cache[av] = np.sqrt(v)
            ker = np.clip(
                _eval_family(self.kspec, float(tj),
                             None if e_vals is None else e_vals[j], mid),
                -cap, cap)
            out[j] = float(np.dot(ker * v_cache[av] * self._sqrt_w, z))
        return out

    def values(self, stream: RngStream) -> np.ndarray:
        x, y, z = self._draw(stream)
        s = self._point_sums(self.t, x, y, self.alpha_t, self.e_t)
        g = self._completion_sums(self.t, z, self.alpha_t, self.e_t)
        return self.scale_t * (s + g)

    def field_pairs(self, stream: RngStream, v: float, u: float):
        """One draw of (X(v,v), X(v,u)) of the bare random field."""
        x, y, z = self._draw(stream)
        spec = self.spec
        alphas = np.array([float(spec.alpha(v)), float(spec.alpha(u))])
        e_vals = None
        if self.e_t is not None:
            e_vals = np.array([float(spec.h(v)) - 1.0 / alphas[0],
                               float(spec.h(u)) - 1.0 / alphas[1]])
        # field rows both evaluate the kernel at time v, with parameters
        # frozen at v resp. u
        s = np.zeros(2)
        g = np.zeros(2)
        ay, sy = np.abs(y), np.sign(y)
        for j in range(2):
            e_j = None if e_vals is None else e_vals[j]
            ker = _eval_family(self.kspec, v, e_j, x)
            if len(y):
                s[j] = float(np.dot(ker, sy * ay ** (-1.0 / alphas[j])))
            if self.completion:
                av = alphas[j]
                kap = self.tiers.comp_kappa
                alive = kap > 0.0
                vv = np.zeros_like(kap)
                vv[alive] = (2.0 * av / (2.0 - av)
                             * kap[alive] ** (-(2.0 - av) / av))
                kerc = np.clip(_eval_family(self.kspec, v, e_j,
                                            self.tiers.comp_mid),
                               -self.tiers.cap, self.tiers.cap)
                g[j] = float(np.dot(kerc * np.sqrt(vv) * self._sqrt_w, z))
        return s[0] + g[0], s[1] + g[1]

    def provenance(self) -> dict:
        p = dict(self.tiers.provenance)
        p["gaussian_completion"] = self.completion
        p["comp_cells"] = int(len(self.tiers.comp_mid))
        return p


class _GaussianEngine:
    """Shared-noise moving-average integrals for fbm / mbm."""

    def __init__(self, spec: ProcessSpec, cfg: SimulationConfig):
        t = cfg.times
        t_lo, t_hi = float(t[0]), float(t[-1])
        spec.validate(t_lo, t_hi)
        self.spec = spec
        self.cfg = cfg
        self.t = t
        w = cfg.wiener
        if w.dx > 0.05:
            raise GridError(f"wiener dx={w.dx} too coarse for the singular "
                            "kernel (need dx <= 0.05)")
        h_lo, h_hi = spec.h.bounds(t_lo, t_hi)
        e_hi = h_hi - 0.5
        t_span = max(abs(t_lo), abs(t_hi), 1.0)

        band_lo = min(0.0, t_lo) - 1.0
        band_hi = max(t_hi, 1.0)
        n_band = int(math.ceil((band_hi - band_lo) / w.dx))
        edges = band_lo + w.dx * np.arange(n_band + 1)
        edges[-1] = band_hi

        # far-field cutoff from the L2 tail bound of the kernel
        if w.x_max is not None:
            x_cut = w.x_max
        else:
            g = 2.0 * (e_hi - 1.0) + 1.0
            coef = (max(abs(e_hi), abs(h_lo - 0.5), 1e-6) * 2.0 * t_span) ** 2
            x_cut = (coef / ((-g) * w.tail_tol)) ** (1.0 / (-g))
            x_cut = min(max(x_cut, -band_lo + 1.0), 1e9)
        far_edges = [-(-band_lo)]
        u = -band_lo
        while u < x_cut:
            u *= w.far_ratio
            far_edges.append(-u)
        far = np.array(far_edges[::-1])
        all_edges = np.concatenate([far[:-1], edges])
        if len(all_edges) > w.max_cells:
            raise GridError(f"wiener grid needs {len(all_edges)} cells, cap "
                            f"{w.max_cells}")
        self.mid = 0.5 * (all_edges[:-1] + all_edges[1:])
        self.w = np.diff(all_edges)
        self._sqrt_w = np.sqrt(self.w)
        # guard: midpoints must not hit {0} or grid times exactly
        crit = np.concatenate([[0.0], t])
        if np.any(np.isin(self.mid, crit)):
            self.mid = self.mid + w.dx * 2**-20

        h_t = np.asarray(spec.h(t), dtype=float) + np.zeros_like(t)
        amp = np.ones_like(t)
        if spec.amplitude is not None:
            amp = np.asarray(spec.amplitude(t), dtype=float) + np.zeros_like(t)
        kspec = KernelSpec(family="fbm_kernel")
        rows = np.empty((len(t), len(self.mid)))
        norm = np.empty(len(t))
        norm_cache = {}
        for i, (ti, hi_) in enumerate(zip(t, h_t)):
            e_i = hi_ - 0.5
            rows[i] = _eval_family(kspec, float(ti), e_i, self.mid)
            key = float(hi_)
            if key not in norm_cache:
                ref = _eval_family(kspec, 1.0, e_i, self.mid)
                norm_cache[key] = math.sqrt(float(np.dot(ref * ref, self.w)))
            norm[i] = norm_cache[key]
        self.K = rows * (amp / norm)[:, None] * self._sqrt_w[None, :]
        self.x_cut = x_cut

    def values(self, stream: RngStream) -> np.ndarray:
        z = stream.normal(len(self.mid))
        return self.K @ z

    def provenance(self) -> dict:
        return {"wiener_cells": int(len(self.mid)),
                "wiener_dx": self.cfg.wiener.dx,
                "wiener_x_cut": float(self.x_cut)}


def _make_engine(spec: ProcessSpec, cfg: SimulationConfig):
    if spec.kind in GAUSSIAN_KINDS:
        return _GaussianEngine(spec, cfg)
    return _PoissonEngine(spec, cfg)


# ----------------------------------------------------------------------
# public simulation API
# ----------------------------------------------------------------------

def ensemble(spec: ProcessSpec, cfg: SimulationConfig,
             engine=None) -> Tuple[np.ndarray, np.ndarray, dict]:
    """Simulate cfg.n_paths independent paths; returns (t, Y, meta).

    Replica i uses stream id cfg.stream_offset + i of cfg.seed, so the
    ensemble is reproducible path-by-path and embarrassingly parallel.
    """
    eng = engine or _make_engine(spec, cfg)
    t = cfg.times
    out = np.empty((cfg.n_paths, len(t)))
    for i in range(cfg.n_paths):
        stream = RngStream(cfg.seed, cfg.stream_offset + i)
        out[i] = eng.values(stream)
    meta = {
        "kind": spec.kind,
        "process": spec.to_json(),
        "seed": cfg.seed,
        "stream_offset": cfg.stream_offset,
        "n_paths": cfg.n_paths,
        "truncation": eng.provenance(),
    }
    return t, out, meta


def simulate(spec: ProcessSpec, cfg: SimulationConfig) -> list:
    """All replica paths as SamplePath objects."""
    t, out, meta = ensemble(spec, cfg)
    paths = []
    for i in range(cfg.n_paths):
        m = dict(meta)
        m["stream_id"] = cfg.stream_offset + i
        m.pop("n_paths")
        paths.append(SamplePath(t=t.copy(), y=out[i], meta=m))
    return paths


def _single(spec: ProcessSpec, cfg: SimulationConfig) -> SamplePath:
    cfg1 = replace(cfg, n_paths=1)
    return simulate(spec, cfg1)[0]


def simulate_fbm(cfg: SimulationConfig, h_val: float) -> SamplePath:
    return _single(ProcessSpec(kind="fbm", h=as_table(h_val)), cfg)


def simulate_mbm(cfg: SimulationConfig, h, amp=1.0) -> SamplePath:
    return _single(ProcessSpec(kind="mbm", h=as_table(h),
                               amplitude=as_table(amp)), cfg)


def simulate_stable_levy(cfg: SimulationConfig, alpha_val: float) -> SamplePath:
    return _single(ProcessSpec(kind="stable_levy", alpha=as_table(alpha_val)),
                   cfg)


def simulate_lsfm(cfg: SimulationConfig, alpha_val: float, h_val: float,
                  a_coef: float = 1.0, b_coef: float = 0.0) -> SamplePath:
    return _single(ProcessSpec(kind="lsfm", alpha=as_table(alpha_val),
                               h=as_table(h_val), a_coef=a_coef,
                               b_coef=b_coef), cfg)


def simulate_lmsm(cfg: SimulationConfig, alpha_val: float, h,
                  a_coef: float = 1.0, b_coef: float = 0.0) -> SamplePath:
    return _single(ProcessSpec(kind="lmsm", alpha=as_table(alpha_val),
                               h=as_table(h), a_coef=a_coef, b_coef=b_coef),
                   cfg)


def simulate_moving_average(cfg: SimulationConfig, g_table: FuncTable,
                            alpha_val: float) -> SamplePath:
    return _single(ProcessSpec(kind="moving_average",
                               alpha=as_table(alpha_val),
                               kernel_table=as_table(g_table)), cfg)


def simulate_reverse_ou(cfg: SimulationConfig, lam: float,
                        alpha_val: float) -> SamplePath:
    return _single(ProcessSpec(kind="reverse_ou", alpha=as_table(alpha_val),
                               decay=lam), cfg)


def simulate_multistable_diagonal(cfg: SimulationConfig, kernel: KernelSpec,
                                  h, alpha, c_factor: bool = True) -> SamplePath:
    spec = ProcessSpec(kind="multistable_diagonal", alpha=as_table(alpha),
                       h=None if h is None else as_table(h),
                       kernel_family=kernel.family,
                       a_coef=kernel.a_coef, b_coef=kernel.b_coef,
                       decay=kernel.decay, kernel_table=kernel.table,
                       c_factor=c_factor)
    return _single(spec, cfg)


def simulate_multistable_levy(cfg: SimulationConfig, alpha,
                              amp=1.0) -> SamplePath:
    return _single(ProcessSpec(kind="multistable_levy", alpha=as_table(alpha),
                               amplitude=as_table(amp)), cfg)


def simulate_lmmm(cfg: SimulationConfig, alpha, h, amp=1.0) -> SamplePath:
    return _single(ProcessSpec(kind="lmmm", alpha=as_table(alpha),
                               h=as_table(h), amplitude=as_table(amp)), cfg)


def simulate_log_fractional_msm(cfg: SimulationConfig, alpha,
                                amp=1.0) -> SamplePath:
    return _single(ProcessSpec(kind="log_fractional_msm",
                               alpha=as_table(alpha), amplitude=as_table(amp)),
                   cfg)


def simulate_multistable_rou(cfg: SimulationConfig, lam: float,
                             alpha) -> SamplePath:
    return _single(ProcessSpec(kind="multistable_rou", alpha=as_table(alpha),
                               decay=lam), cfg)


def apply_amplitude(path: SamplePath, amp) -> SamplePath:
    """Pointwise modulation a(t) Y(t); records the table in metadata."""
    table = as_table(amp)
    vals = np.asarray(table(path.t), dtype=float) + np.zeros_like(path.t)
    meta = dict(path.meta)
    mods = list(meta.get("amplitude_modulations", []))
    mods.append(table.to_json())
    meta["amplitude_modulations"] = mods
    return SamplePath(t=path.t.copy(), y=path.y * vals, meta=meta)


def field_pair_sampler(spec: ProcessSpec, cfg: SimulationConfig,
                       v: float, u: float, n: int,
                       stream_offset: Optional[int] = None):
    """n independent draws of (X(v,v), X(v,u)), one cloud per draw."""
    if v == u:
        raise ValueError("transfer probe needs v != u")
    eng = _make_engine(spec, cfg)
    if not isinstance(eng, _PoissonEngine):
        raise ConfigError("field sampling is defined for the Poisson kinds")
    off = cfg.stream_offset if stream_offset is None else stream_offset
    a = np.empty(n)
    b = np.empty(n)
    for i in range(n):
        stream = RngStream(cfg.seed, off + i)
        a[i], b[i] = eng.field_pairs(stream, v, u)
    return a, b
