"""Photon yield, baseline yield and relative quantum efficiency (RQE).

Three routes compute the photon yield of a cascade:

* ``MARKOV``: expected firings of each transition in the embedded jump chain
  (exact; rational when the rates are rational),
* ``TIME_INTEGRAL``: integrate the photon and phonon emission rates along the
  numerically solved kinetics,
* ``CLOSED_FORM``: the two-emitter closed-form expressions, and ``n/(1+x)`` for
  independent emitters.
"""
from __future__ import annotations

import enum
import graphlib
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .errors import IntegrationError, UnsupportedGraphError, ValidationError
from .model import (Kind, RateSet, TransitionGraph, _validate_n, build_independent_graph,
                    superradiant_graph)

__all__ = [
    "Method",
    "YieldReport",
    "RqeOptimum",
    "yield_markov",
    "yield_time_integral",
    "yield_closed_form_two",
    "baseline_yield",
    "rqe",
    "scan_rqe",
    "maximize_rqe",
]


class Method(str, enum.Enum):
    CLOSED_FORM = "CLOSED_FORM"
    TIME_INTEGRAL = "TIME_INTEGRAL"
    MARKOV = "MARKOV"


@dataclass(frozen=True)
class YieldReport:
    n_emitters: int
    ratio: float
    q_photon: float
    q_phonon: float
    q_baseline: float
    rqe: float
    method: Method

    def as_dict(self) -> dict:
        return {"n_emitters": self.n_emitters, "ratio": float(self.ratio),
                "q_photon": float(self.q_photon), "q_phonon": float(self.q_phonon),
                "q_baseline": float(self.q_baseline), "rqe": float(self.rqe),
                "method": self.method.value}


def _baseline(n, rates):
    return n * rates.gamma_r / (rates.gamma_r + rates.gamma)


def _report(graph, q_photon, q_phonon, method) -> YieldReport:
    q0 = _baseline(graph.n_emitters, graph.rates)
    return YieldReport(graph.n_emitters, graph.rates.ratio, q_photon, q_phonon, q0,
                       q_photon / q0, method)


def expected_firings(graph: TransitionGraph) -> dict[tuple[str, str, Kind], object]:
    """Expected number of times each transition fires before absorption.

    For an acyclic chain the fundamental-matrix system ``(I - Q)^T v = e_start``
    is triangular in topological order, so forward substitution solves it
    exactly in whatever number type the rates carry.
    """
    if graph.has_pump:
        raise UnsupportedGraphError("expected yields need an absorbing cascade (no pump)")
    try:
        order = graph.topological_order()
    except graphlib.CycleError as exc:
        raise UnsupportedGraphError(f"{graph.name} is cyclic") from exc
    rates = graph.rates
    visits = {cid: 0 for cid in graph.ids}
    visits[graph.initial_id] = 1
    firings = {}
    for cid in order:
        if cid == graph.ground_id:
            continue
        out = graph.outgoing(cid)
        flows = [t.total_coefficient * rates.rate(t.kind) for t in out]
        total = sum(flows)
        if total == 0:
            raise UnsupportedGraphError(f"class {cid} has no outflow; chain never absorbs")
        for t, f in zip(out, flows):
            n_fire = visits[cid] * f / total
            firings[(t.source, t.target, t.kind)] = n_fire
            visits[t.target] += n_fire
    return firings


def yield_markov(graph: TransitionGraph) -> YieldReport:
    """Exact expected photon and phonon counts from the absorbing jump chain."""
    firings = expected_firings(graph)
    q_photon = sum((v for (_, _, k), v in firings.items() if k is Kind.RADIATIVE), 0)
    q_phonon = sum((v for (_, _, k), v in firings.items() if k is Kind.NONRADIATIVE), 0)
    return _report(graph, q_photon, q_phonon, Method.MARKOV)


DRAIN_TOL = 1e-12


def yield_time_integral(graph: TransitionGraph, rtol: float = 1e-11,
                        atol: float = 1e-14) -> YieldReport:
    """Integrate the photon/phonon emission rates alongside the populations.

    Integration runs until the surviving excited probability is below
    ``DRAIN_TOL``; the unaccounted quanta are then at most ``n * DRAIN_TOL``.
    """
    if graph.has_pump:
        raise UnsupportedGraphError("time-integrated yield diverges with a pump")
    M = graph.rate_matrix()
    n = len(graph.classes)
    rad = np.zeros(n)
    non = np.zeros(n)
    gr, g = float(graph.rates.gamma_r), float(graph.rates.gamma)
    for t in graph.transitions:
        i = graph.index(t.source)
        w = graph.classes[i].weight * float(t.total_coefficient)
        if t.kind is Kind.RADIATIVE:
            rad[i] += w * gr
        else:
            non[i] += w * g
    A = np.zeros((n + 2, n + 2))
    A[:n, :n] = M
    A[n, :n] = rad
    A[n + 1, :n] = non
    y0 = np.zeros(n + 2)
    y0[graph.index(graph.initial_id)] = 1.0
    ground = graph.index(graph.ground_id)
    slowest = min(-M[i, i] for i in range(n) if i != ground)
    span = 40.0 / slowest
    t0, y = 0.0, y0
    # resonant decays carry polynomial prefactors, so extend until drained
    for _ in range(8):
        sol = solve_ivp(lambda _t, y: A @ y, (t0, t0 + span), y, method="DOP853",
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegrationError(f"yield integration failed: {sol.message}")
        t0, y = t0 + span, sol.y[:, -1]
        left = graph.weights @ y[:n] - y[ground]
        if left < DRAIN_TOL:
            break
    else:
        raise IntegrationError(f"excited probability {left:.2e} left at t={t0:.3g}")
    return _report(graph, float(y[n]), float(y[n + 1]), Method.TIME_INTEGRAL)


def yield_closed_form_two(rates: RateSet) -> YieldReport:
    """Closed-form two-emitter photon yield, independent-emitter yield and their ratio."""
    x = rates.ratio
    q = (4 + 2 * x ** 2 + 7 * x) / ((x + 1) ** 2 * (x + 2))
    q0 = 2 / (1 + x)
    r = (2 + x ** 2 + Fraction(7, 2) * x) / ((x + 1) * (x + 2))
    return YieldReport(2, x, q, 2 - q, q0, r, Method.CLOSED_FORM)


def baseline_yield(n: int, rates: RateSet) -> YieldReport:
    """Photon yield of ``n`` independent emitters, ``n/(1 + gamma/gamma_r)``."""
    _validate_n(n)
    q0 = _baseline(n, rates)
    return YieldReport(n, rates.ratio, q0, n - q0, q0, 1, Method.CLOSED_FORM)


def rqe(n: int, rates: RateSet, kind: str = "explicit") -> YieldReport:
    """RQE of ``n`` superradiant emitters versus ``n`` independent ones (Markov route)."""
    _validate_n(n)
    return yield_markov(superradiant_graph(n, rates, kind))


def scan_rqe(n: int, ratios, kind: str = "explicit") -> list[YieldReport]:
    return [rqe(n, RateSet.from_ratio(x), kind) for x in ratios]


@dataclass
class RqeOptimum:
    n_emitters: int
    ratio: float
    rqe: float
    flat: bool = False
    unimodal: bool = True
    n_local_maxima: int = 1
    grid_ratio: np.ndarray = field(default=None, repr=False)
    grid_rqe: np.ndarray = field(default=None, repr=False)
    message: str = ""


def _local_maxima(values: np.ndarray, tol: float = 1e-13) -> list[int]:
    idx = []
    for i in range(len(values)):
        left = values[i - 1] if i > 0 else -np.inf
        right = values[i + 1] if i + 1 < len(values) else -np.inf
        if values[i] > left + tol and values[i] > right + tol:
            idx.append(i)
    return idx


def maximize_rqe(n: int, bracket: tuple[float, float] = (0.01, 20.0), *,
                 xtol: float = 1e-6, scan_points: int = 64,
                 kind: str = "explicit") -> RqeOptimum:
    """Maximise RQE over ``gamma/gamma_r``.

    A coarse log-spaced scan checks unimodality and seeds a golden-section
    refinement. If the scan maximum sits on the bracket edge the bracket is
    expanded geometrically first. Several local maxima trigger a warning and
    the global grid maximum is returned unrefined.
    """
    _validate_n(n)
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise ValidationError(f"bracket must satisfy 0 < lo < hi, got {bracket}")

    def R(x):
        return float(rqe(n, RateSet.from_ratio(x), kind).rqe)

    for _ in range(40):
        xs = np.geomspace(lo, hi, scan_points)
        rs = np.array([R(x) for x in xs])
        if rs.max() - rs.min() < 1e-12:
            return RqeOptimum(n, math.nan, float(rs.max()), flat=True, grid_ratio=xs,
                              grid_rqe=rs, message="flat objective")
        i = int(np.argmax(rs))
        if i == 0 and lo > 1e-9:
            lo /= 4
        elif i == len(xs) - 1 and hi < 1e9:
            hi *= 4
        else:
            break
    peaks = _local_maxima(rs)
    if len(peaks) > 1:
        msg = f"RQE for n={n} has {len(peaks)} local maxima on the scan grid"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        return RqeOptimum(n, float(xs[i]), float(rs[i]), unimodal=False,
                          n_local_maxima=len(peaks), grid_ratio=xs, grid_rqe=rs, message=msg)
    if i in (0, len(xs) - 1):
        return RqeOptimum(n, float(xs[i]), float(rs[i]), grid_ratio=xs, grid_rqe=rs,
                          message="maximum at the edge of the expanded bracket")
    res = minimize_scalar(lambda x: -R(x), bracket=(xs[i - 1], xs[i], xs[i + 1]),
                          method="golden", options={"xtol": xtol / (2 * xs[i])})
    return RqeOptimum(n, float(res.x), float(-res.fun), n_local_maxima=len(peaks),
                      grid_ratio=xs, grid_rqe=rs)
