"""Time evolution of class populations and the radiated power.

Two independent solvers are provided. :func:`solve_cascade` walks an acyclic
graph in topological order and represents every population as a finite sum
of ``t**m * exp(-lam * t)`` terms obtained by closed-form convolution.
:func:`solve_numeric` integrates the linear ODE with an adaptive Runge-Kutta
scheme and also handles pumped (cyclic) graphs.
"""
from __future__ import annotations

import graphlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gammainc

from .errors import (DegenerateFormulaError, IntegrationError, UnsupportedGraphError,
                     ValidationError)
from .model import Kind, RateSet, TransitionGraph, build_independent_graph, build_two_emitter_graph

__all__ = [
    "ExpSum",
    "Trajectory",
    "PowerSeries",
    "cascade_expsums",
    "solve_cascade",
    "solve_numeric",
    "analytic_two_emitter",
    "radiated_power",
    "power_expsum",
    "power_decomposition",
    "default_time_grid",
]

RESONANCE_RTOL = 1e-4
_SERIES_TOL = 1e-18


def _shift(p: np.ndarray, delta: float, lam: float) -> np.ndarray:
    """Coefficients of ``p(t) * exp(-delta t)`` truncated around ``exp(-lam t)``.

    Used to rewrite ``p(t) exp(-(lam + delta) t)`` as ``q(t) exp(-lam t)`` when
    ``|delta| << lam``. Against the ``exp(-lam t)`` envelope the dropped terms are
    bounded by ``(k |delta| / lam)**k / k!`` uniformly in t, so the series stops
    once that falls below ``_SERIES_TOL``.
    """
    if delta == 0:
        return p.copy()
    r = abs(delta) / lam
    series = [1.0]
    k = 1
    while True:
        series.append(series[-1] * -delta / k)
        k += 1
        if (len(p) + k) ** k * r ** k / math.factorial(k) < _SERIES_TOL:
            break
    return np.polynomial.polynomial.polymul(p, series)


class ExpSum:
    """``f(t) = sum_j P_j(t) exp(-lam_j t)`` with polynomial ``P_j``.

    Stored as ``{lam: coeffs}`` where ``coeffs[m]`` multiplies ``t**m``.
    Decay constants within :data:`RESONANCE_RTOL` of each other share one key;
    the small offset is carried as a truncated series in the polynomial, which
    avoids the cancellation of ``1/(lam - mu)`` terms near resonance.
    """

    def __init__(self, terms: dict[float, np.ndarray] | None = None):
        self.terms: dict[float, np.ndarray] = {}
        for lam, coeffs in (terms or {}).items():
            self.add(lam, coeffs)

    def _key(self, lam: float) -> float:
        for existing in self.terms:
            if existing == lam or (existing > 0 and lam > 0 and
                                   abs(existing - lam) <= RESONANCE_RTOL * max(existing, lam)):
                return existing
        return lam

    def add(self, lam: float, coeffs) -> None:
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        lam = float(lam)
        key = self._key(lam)
        if key != lam:
            coeffs = _shift(coeffs, lam - key, key)
        old = self.terms.get(key)
        if old is None:
            self.terms[key] = coeffs.copy()
        else:
            size = max(len(old), len(coeffs))
            merged = np.zeros(size)
            merged[:len(old)] += old
            merged[:len(coeffs)] += coeffs
            self.terms[key] = merged

    def scaled(self, c: float) -> "ExpSum":
        return ExpSum({lam: c * p for lam, p in self.terms.items()})

    def __add__(self, other: "ExpSum") -> "ExpSum":
        out = ExpSum(self.terms)
        for lam, p in other.terms.items():
            out.add(lam, p)
        return out

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for lam, p in self.terms.items():
            out = out + np.polynomial.polynomial.polyval(t, p) * np.exp(-lam * t)
        return out

    def integral(self) -> float:
        """Integral over ``[0, inf)``; infinite if any non-decaying term survives."""
        total = 0.0
        for lam, p in self.terms.items():
            for m, a in enumerate(p):
                if a == 0:
                    continue
                if lam <= 0:
                    return math.copysign(math.inf, a)
                total += a * math.factorial(m) / lam ** (m + 1)
        return total

    def cumulative(self, t) -> np.ndarray:
        """Integral over ``[0, t]``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for lam, p in self.terms.items():
            for m, a in enumerate(p):
                if a == 0:
                    continue
                if lam == 0:
                    out = out + a * t ** (m + 1) / (m + 1)
                else:
                    out = out + a * math.factorial(m) / lam ** (m + 1) * gammainc(m + 1, lam * t)
        return out

    def convolve_decay(self, lam: float) -> "ExpSum":
        """Solution ``y`` of ``y' = -lam*y + self(t)`` with ``y(0) = 0``."""
        out = ExpSum()
        for mu, p in self.terms.items():
            delta = lam - mu
            if delta == 0 or (lam > 0 and mu > 0 and
                              abs(delta) <= RESONANCE_RTOL * max(lam, mu)):
                # (near-)resonant: move the term onto exp(-lam t), then
                # the integral of tau^m is tau^(m+1)/(m+1)
                p = _shift(p, mu - lam, lam)
                q = np.zeros(len(p) + 1)
                q[1:] = p / np.arange(1, len(p) + 1)
                out.add(lam, q)
                continue
            for m, a in enumerate(p):
                if a == 0:
                    continue
                q = np.zeros(m + 1)
                for i in range(m + 1):
                    q[m - i] = (-1) ** i * math.factorial(m) / math.factorial(m - i) / delta ** (i + 1)
                out.add(mu, a * q)
                out.add(lam, [-a * (-1) ** m * math.factorial(m) / delta ** (m + 1)])
        return out

    def __repr__(self):
        return f"ExpSum({self.terms!r})"


@dataclass
class Trajectory:
    """Population of every class on a time grid.

    ``populations[i]`` follows ``graph.classes[i]`` (ground row included) in the
    class's own semantics.
    """

    graph: TransitionGraph
    time: np.ndarray
    populations: np.ndarray
    method: str = "cascade"

    @property
    def ground(self) -> np.ndarray:
        return self.populations[self.graph.index(self.graph.ground_id)]

    def population(self, class_id: str) -> np.ndarray:
        return self.populations[self.graph.index(class_id)]

    def total_probability(self) -> np.ndarray:
        return self.graph.weights @ self.populations

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.graph.classes]


@dataclass
class PowerSeries:
    time: np.ndarray
    power: np.ndarray
    baseline_power: np.ndarray
    addition: np.ndarray = field(init=False)

    def __post_init__(self):
        self.addition = self.power - self.baseline_power


def _check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValidationError("time grid must be a non-empty 1-D array")
    if t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValidationError("time grid must be non-negative and strictly increasing")
    return t


def cascade_expsums(graph: TransitionGraph) -> dict[str, ExpSum]:
    """Closed-form population of every non-ground class, starting from the top class."""
    try:
        order = graph.topological_order()
    except graphlib.CycleError as exc:
        raise UnsupportedGraphError(
            f"{graph.name} has cycles (pump edges); use solve_numeric or "
            "pump.steady_state instead") from exc
    M = graph.rate_matrix()
    pos = {cid: i for i, cid in enumerate(graph.ids)}
    start = graph.initial_id
    sols: dict[str, ExpSum] = {}
    for cid in order:
        if cid == graph.ground_id:
            continue
        i = pos[cid]
        lam = -M[i, i]
        source = ExpSum()
        for pid, sol in sols.items():
            k = M[i, pos[pid]]
            if k != 0:
                source = source + sol.scaled(k)
        y = source.convolve_decay(lam)
        if cid == start:
            y.add(lam, [1.0])
        sols[cid] = y
    return sols


def solve_cascade(graph: TransitionGraph, t_grid) -> Trajectory:
    """Analytic cascade solution evaluated on ``t_grid``."""
    t = _check_grid(t_grid)
    sols = cascade_expsums(graph)
    pops = np.zeros((len(graph.classes), t.size))
    for i, c in enumerate(graph.classes):
        if c.id != graph.ground_id:
            pops[i] = sols[c.id](t)
    # ground accumulates the integrated inflow; 1 - sum(others) would lose
    # relative accuracy at early times
    g = graph.index(graph.ground_id)
    M = graph.rate_matrix()
    for j, c in enumerate(graph.classes):
        if M[g, j] != 0:
            pops[g] += M[g, j] * sols[c.id].cumulative(t)
    # the initial state is known exactly; skip the rounding of cancelling terms
    at_zero = t == 0
    pops[:, at_zero] = 0.0
    pops[graph.index(graph.initial_id), at_zero] = 1.0
    return Trajectory(graph, t, pops, method="cascade")


def solve_numeric(graph: TransitionGraph, t_grid, initial=None, *,
                  rtol: float = 1e-10, atol: float = 1e-12,
                  method: str = "DOP853") -> Trajectory:
    """Integrate ``dx/dt = M x`` from ``t = 0`` and sample on ``t_grid``.

    ``initial`` maps class id (or label) to population, or is a full vector in
    class order; default puts all probability in the top class.
    """
    t = _check_grid(t_grid)
    n = len(graph.classes)
    x0 = np.zeros(n)
    if initial is None:
        x0[graph.index(graph.initial_id)] = 1.0
    elif isinstance(initial, dict):
        for key, value in initial.items():
            x0[graph.index(key)] = value
    else:
        x0 = np.asarray(initial, dtype=float).copy()
        if x0.shape != (n,):
            raise ValidationError(f"initial vector must have length {n}")
    total = graph.weights @ x0
    if abs(total - 1.0) > 1e-12 or np.any(x0 < 0):
        raise ValidationError(f"initial condition must be normalised and non-negative "
                              f"(total probability {total!r})")
    M = graph.rate_matrix()
    if t[-1] == 0:
        return Trajectory(graph, t, x0[:, None].copy(), method="numeric")
    options = {"jac": M} if method in ("Radau", "BDF", "LSODA") else {}
    sol = solve_ivp(lambda _t, x: M @ x, (0.0, t[-1]), x0, method=method,
                    t_eval=t, rtol=rtol, atol=atol, **options)
    if not sol.success:
        raise IntegrationError(f"{method} failed on {graph.name}: {sol.message} "
                               f"(nfev={sol.nfev})")
    drift = np.max(np.abs(graph.weights @ sol.y - 1.0))
    if drift > 1e3 * max(rtol, atol):
        raise IntegrationError(f"probability drift {drift:.3e} exceeds tolerance on {graph.name}")
    return Trajectory(graph, t, sol.y, method="numeric")


def analytic_two_emitter(rates: RateSet, t):
    """Closed forms ``(W2, W+, W1)`` for the two-emitter cascade."""
    g, gr = rates.gamma, rates.gamma_r
    if g == 0:
        raise DegenerateFormulaError(
            "closed form for W+ divides by gamma; use solve_cascade for gamma=0")
    t = np.asarray(t, dtype=float)
    w2 = np.exp(-2 * (g + gr) * t)
    wp = 2 * gr / g * (1 - np.exp(-g * t)) * np.exp(-(2 * gr + g) * t)
    w1 = g / (g + gr) * (1 - np.exp(-(gr + g) * t)) * np.exp(-(gr + g) * t)
    return w2, wp, w1


def _radiative_weights(graph: TransitionGraph) -> np.ndarray:
    """Vector ``r`` with photon rate ``= r @ populations``."""
    r = np.zeros(len(graph.classes))
    gr = float(graph.rates.gamma_r)
    for tr in graph.transitions:
        if tr.kind is Kind.RADIATIVE:
            i = graph.index(tr.source)
            r[i] += float(tr.total_coefficient) * gr * graph.classes[i].weight
    return r


def power_expsum(graph: TransitionGraph) -> ExpSum:
    """Radiated power of the cascade as a closed-form exponential sum."""
    sols = cascade_expsums(graph)
    r = _radiative_weights(graph)
    out = ExpSum()
    for i, c in enumerate(graph.classes):
        if r[i] and c.id in sols:
            out = out + sols[c.id].scaled(r[i])
    return out


def radiated_power(graph: TransitionGraph, traj: Trajectory, baseline: bool = True) -> PowerSeries:
    """Photon emission rate summed over all radiative transitions.

    The baseline is the same number of independent emitters, solved on the
    same grid (zeros when ``baseline`` is false or the graph is pumped).
    """
    if traj.graph is not graph and traj.graph.ids != graph.ids:
        raise ValidationError("trajectory was not computed on this graph")
    if traj.populations.shape[0] != len(graph.classes):
        raise ValidationError("trajectory shape does not match graph")
    power = _radiative_weights(graph) @ traj.populations
    base = np.zeros_like(power)
    if baseline and not graph.has_pump:
        ind = build_independent_graph(graph.n_emitters, graph.rates)
        base = _radiative_weights(ind) @ solve_cascade(ind, traj.time).populations
    return PowerSeries(traj.time, power, base)


def power_decomposition(rates: RateSet, t_grid) -> PowerSeries:
    """Two-emitter power split into the independent-emitter part and the addition."""
    t = _check_grid(t_grid)
    g, gr = float(rates.gamma), float(rates.gamma_r)
    s = g + gr
    baseline = 2 * gr * np.exp(-s * t)
    w1_indep = (1 - np.exp(-s * t)) * np.exp(-s * t)
    wp = cascade_expsums(build_two_emitter_graph(rates))["Wp"](t)
    addition = 2 * gr * (wp - gr / s * w1_indep)
    return PowerSeries(t, baseline + addition, baseline)


def default_time_grid(rates: RateSet | None = None, n_points: int = 2000,
                      t_max: float | None = None) -> np.ndarray:
    """Half geometric (resolves the early rise), half linear grid on ``[0, t_max]``."""
    gr = 1.0 if rates is None else float(rates.gamma_r)
    t_max = 10.0 / gr if t_max is None else float(t_max)
    n_geo = n_points // 2
    geo = np.geomspace(1e-5 * t_max, t_max, n_geo, endpoint=False)
    lin = np.linspace(0.0, t_max, n_points - n_geo)
    grid = np.unique(np.concatenate([geo, lin]))
    return grid
