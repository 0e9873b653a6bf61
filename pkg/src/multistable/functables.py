"""Declarative scalar functions of time: h(t), alpha(t), a(t) and kernels g.

A FuncTable is one of four shapes: constant, linear, sinusoid, or a
piecewise-linear knot table.  No expression parser; configs stay
declarative and testable.  Codomain bounds are available for every kind,
which lets process validation and truncation sizing work from declared
ranges instead of sampling the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

_KINDS = ("constant", "linear", "sinusoid", "piecewise")


@dataclass(frozen=True)
class FuncTable:
    kind: str
    value: float = 0.0                 # constant
    intercept: float = 0.0             # linear
    slope: float = 0.0                 # linear
    offset: float = 0.0                # sinusoid
    amplitude: float = 0.0             # sinusoid
    frequency: float = 1.0             # sinusoid
    phase: float = 0.0                 # sinusoid
    knots: Tuple[Tuple[float, float], ...] = ()   # piecewise
    domain: Optional[Tuple[float, float]] = None
    codomain: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown FuncTable kind {self.kind!r}")
        if self.kind == "piecewise":
            if len(self.knots) < 2:
                raise ValueError("piecewise table needs at least two knots")
            ts = np.array([k[0] for k in self.knots], dtype=float)
            if not np.all(np.diff(ts) > 0):
                raise ValueError("piecewise knots must be strictly increasing")

    # -- constructors -------------------------------------------------

    @staticmethod
    def constant(value: float, **kw) -> "FuncTable":
        return FuncTable(kind="constant", value=float(value), **kw)

    @staticmethod
    def linear(intercept: float, slope: float, **kw) -> "FuncTable":
        return FuncTable(kind="linear", intercept=float(intercept),
                         slope=float(slope), **kw)

    @staticmethod
    def sinusoid(offset: float, amplitude: float, frequency: float = 1.0,
                 phase: float = 0.0, **kw) -> "FuncTable":
        return FuncTable(kind="sinusoid", offset=float(offset),
                         amplitude=float(amplitude), frequency=float(frequency),
                         phase=float(phase), **kw)

    @staticmethod
    def piecewise(knots: Sequence[Sequence[float]], **kw) -> "FuncTable":
        kt = tuple((float(t), float(v)) for t, v in knots)
        return FuncTable(kind="piecewise", knots=kt, **kw)

    # -- evaluation ----------------------------------------------------

    def _declared_domain(self) -> Optional[Tuple[float, float]]:
        if self.domain is not None:
            return self.domain
        if self.kind == "piecewise":
            return (self.knots[0][0], self.knots[-1][0])
        return None

    def __call__(self, t, outside: str = "error"):
        """Evaluate at t (scalar or array).

        ``outside`` controls behaviour past the declared domain:
        'error' raises, 'zero' returns 0 there, 'clamp' evaluates at the
        nearest domain endpoint.
        """
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_arr = np.atleast_1d(t_arr)

        dom = self._declared_domain()
        mask_out = None
        if dom is not None:
            lo, hi = dom
            mask_out = (t_arr < lo) | (t_arr > hi)
            if mask_out.any():
                if outside == "error":
                    bad = t_arr[mask_out][0]
                    raise ValueError(f"t={bad} outside table domain {dom}")
                if outside == "clamp":
                    t_arr = np.clip(t_arr, lo, hi)
                    mask_out = None
                elif outside != "zero":
                    raise ValueError(f"unknown outside policy {outside!r}")

        if self.kind == "constant":
            v = np.full_like(t_arr, self.value)
        elif self.kind == "linear":
            v = self.intercept + self.slope * t_arr
        elif self.kind == "sinusoid":
            v = self.offset + self.amplitude * np.sin(
                self.frequency * t_arr + self.phase)
        else:
            ts = np.array([k[0] for k in self.knots])
            vs = np.array([k[1] for k in self.knots])
            v = np.interp(t_arr, ts, vs)

        if mask_out is not None and mask_out.any():
            v = np.where(mask_out, 0.0, v)
        return float(v[0]) if scalar else v

    # -- range information ---------------------------------------------

    def bounds(self, t_lo: float, t_hi: float) -> Tuple[float, float]:
        """Codomain bounds over [t_lo, t_hi].

        Exact for constant / linear / piecewise; conservative
        (offset +- |amplitude|) for sinusoids.  A declared ``codomain``
        overrides the computed range.
        """
        if self.codomain is not None:
            return self.codomain
        if self.kind == "constant":
            return (self.value, self.value)
        if self.kind == "linear":
            a = self.intercept + self.slope * t_lo
            b = self.intercept + self.slope * t_hi
            return (min(a, b), max(a, b))
        if self.kind == "sinusoid":
            return (self.offset - abs(self.amplitude),
                    self.offset + abs(self.amplitude))
        ts = np.array([k[0] for k in self.knots])
        vs = np.array([k[1] for k in self.knots])
        inside = (ts >= t_lo) & (ts <= t_hi)
        cand = [self(np.clip(t_lo, ts[0], ts[-1])),
                self(np.clip(t_hi, ts[0], ts[-1]))]
        if inside.any():
            cand.extend(vs[inside].tolist())
        return (float(min(cand)), float(max(cand)))

    def abs_max(self, t_lo: float, t_hi: float) -> float:
        lo, hi = self.bounds(t_lo, t_hi)
        return max(abs(lo), abs(hi))

    def support(self) -> Tuple[float, float]:
        """Interval outside of which the 'zero' policy evaluates to 0."""
        dom = self._declared_domain()
        if dom is None:
            raise ValueError("table has unbounded domain; no compact support")
        return dom

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "constant":
            d["value"] = self.value
        elif self.kind == "linear":
            d["intercept"] = self.intercept
            d["slope"] = self.slope
        elif self.kind == "sinusoid":
            d.update(offset=self.offset, amplitude=self.amplitude,
                     frequency=self.frequency, phase=self.phase)
        else:
            d["knots"] = [[t, v] for t, v in self.knots]
        if self.domain is not None:
            d["domain"] = list(self.domain)
        if self.codomain is not None:
            d["codomain"] = list(self.codomain)
        return d

    @staticmethod
    def from_json(obj) -> "FuncTable":
        if isinstance(obj, (int, float)):
            return FuncTable.constant(float(obj))
        if not isinstance(obj, dict):
            raise ValueError(f"cannot build FuncTable from {obj!r}")
        kw = {}
        if "domain" in obj:
            kw["domain"] = tuple(obj["domain"])
        if "codomain" in obj:
            kw["codomain"] = tuple(obj["codomain"])
        kind = obj.get("kind")
        if kind == "constant":
            return FuncTable.constant(obj["value"], **kw)
        if kind == "linear":
            return FuncTable.linear(obj.get("intercept", 0.0),
                                    obj.get("slope", 0.0), **kw)
        if kind == "sinusoid":
            return FuncTable.sinusoid(obj.get("offset", 0.0),
                                      obj.get("amplitude", 0.0),
                                      obj.get("frequency", 1.0),
                                      obj.get("phase", 0.0), **kw)
        if kind == "piecewise":
            return FuncTable.piecewise(obj["knots"], **kw)
        raise ValueError(f"unknown FuncTable kind {kind!r}")


def as_table(x) -> FuncTable:
    """Coerce a number or FuncTable (or its JSON form) to a FuncTable."""
    if isinstance(x, FuncTable):
        return x
    if isinstance(x, (int, float)):
        return FuncTable.constant(float(x))
    if isinstance(x, dict):
        return FuncTable.from_json(x)
    raise TypeError(f"cannot interpret {x!r} as a parameter function")


def eval_func(table: FuncTable, t: float) -> float:
    """Value of the represented function at t (errors outside the domain)."""
    return table(t, outside="error")
