"""Incoherently pumped two-emitter kinetics and its stationary state.

The pump never creates the symmetric one-excitation state from the ground
state; it re-excites ``W+`` and the individual ``W1`` copies to the doubly
excited state and lifts the ground state into the ``W1`` copies. Spontaneous
emission from a ``W1`` copy uses ``gamma_r`` like every other radiative step.

The stationary efficiency reported here (photons out per pump quantum in) is
a metric defined by this package, not a standard RQE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure, ValidationError
from .kinetics import Trajectory, solve_numeric
from .model import (Kind, ManifoldClass, RateSet, Semantics, Transition, TransitionGraph,
                    _validate_n, build_two_emitter_graph)

__all__ = [
    "SteadyState",
    "build_pumped_two_emitter_graph",
    "build_pumped_graph",
    "build_pumped_independent_graph",
    "steady_state",
    "pumped_dynamics",
    "flows",
]


def build_pumped_two_emitter_graph(rates: RateSet) -> TransitionGraph:
    base = build_two_emitter_graph(RateSet(rates.gamma_r, rates.gamma))
    if rates.gamma_p == 0:
        return base.with_rates(rates)
    P = Kind.PUMP
    pump_edges = (
        Transition("Wp", "W2", P, 1),
        Transition("W1", "W2", P, 1),
        # either emitter of the ground state can be pumped into its own W1 copy
        Transition("W0", "W1", P, 1, branches=2),
    )
    return TransitionGraph("pumped_two_emitter", 2, base.classes,
                           base.transitions + pump_edges, base.ground_id, rates)


def build_pumped_graph(n: int, rates: RateSet) -> TransitionGraph:
    """Pumped superradiant graph; pump rules exist only for two emitters."""
    _validate_n(n)
    if n != 2:
        raise ValidationError(f"pumped superradiant graph is only defined for n=2, got n={n}")
    return build_pumped_two_emitter_graph(rates)


def build_pumped_independent_graph(n: int, rates: RateSet) -> TransitionGraph:
    """``n`` independent emitters, each pumped at ``gamma_p`` while in its ground state."""
    _validate_n(n)
    classes = tuple(
        ManifoldClass(f"I{m}", f"I({m})", n, m, degeneracy=math.comb(n, m),
                      semantics=Semantics.AGGREGATED)
        for m in range(n, -1, -1))
    transitions = []
    for m in range(n, 0, -1):
        transitions.append(Transition(f"I{m}", f"I{m - 1}", Kind.RADIATIVE, m))
        transitions.append(Transition(f"I{m}", f"I{m - 1}", Kind.NONRADIATIVE, m))
    if rates.gamma_p != 0:
        for m in range(n):
            transitions.append(Transition(f"I{m}", f"I{m + 1}", Kind.PUMP, n - m))
    return TransitionGraph(f"pumped_independent_{n}", n, classes, tuple(transitions),
                           "I0", rates)


def flows(graph: TransitionGraph, populations) -> dict[Kind, float]:
    """Total quanta per unit time carried by each transition kind."""
    x = np.asarray(populations, dtype=float)
    out = {k: 0.0 for k in Kind}
    for t in graph.transitions:
        i = graph.index(t.source)
        rate = float(t.total_coefficient) * float(graph.rates.rate(t.kind))
        out[t.kind] += float(rate * graph.classes[i].weight * x[i])
    return out


@dataclass
class SteadyState:
    populations: dict[str, float]
    power: float
    phonon_rate: float
    pump_quanta_rate: float
    efficiency: float
    residual: float
    baseline_power: float = math.nan
    baseline_efficiency: float = math.nan
    rates: RateSet = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "populations": dict(self.populations),
            "power": self.power,
            "phonon_rate": self.phonon_rate,
            "pump_quanta_rate": self.pump_quanta_rate,
            "efficiency": self.efficiency,
            "residual": self.residual,
            "baseline_power": self.baseline_power,
            "baseline_efficiency": self.baseline_efficiency,
        }


def _stationary_vector(graph: TransitionGraph) -> tuple[np.ndarray, float]:
    M = graph.rate_matrix()
    A = M.copy()
    g = graph.index(graph.ground_id)
    # columns of M conserve weighted probability, so the ground row is redundant
    A[g, :] = graph.weights
    b = np.zeros(len(graph.classes))
    b[g] = 1.0
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e14:
        raise NumericalFailure(f"stationary system for {graph.name} is singular "
                               f"(condition number {cond:.3e})")
    x = np.linalg.solve(A, b)
    return x, float(np.max(np.abs(M @ x)))


def steady_state(graph: TransitionGraph, baseline: bool = True) -> SteadyState:
    """Stationary populations, photon rate and pump absorption rate.

    With ``gamma_p = 0`` the unique stationary state is the ground state.
    """
    x, residual = _stationary_vector(graph)
    f = flows(graph, x)
    pump = f[Kind.PUMP]
    power = f[Kind.RADIATIVE]
    eff = power / pump if pump > 0 else math.nan
    pops = {c.label: float(v) for c, v in zip(graph.classes, x)}
    out = SteadyState(pops, power, f[Kind.NONRADIATIVE], pump, eff, residual,
                      rates=graph.rates)
    if baseline:
        ind = build_pumped_independent_graph(graph.n_emitters, graph.rates)
        xb, _ = _stationary_vector(ind)
        fb = flows(ind, xb)
        out.baseline_power = fb[Kind.RADIATIVE]
        out.baseline_efficiency = (fb[Kind.RADIATIVE] / fb[Kind.PUMP]
                                   if fb[Kind.PUMP] > 0 else math.nan)
    return out


def pumped_dynamics(graph: TransitionGraph, t_grid, initial=None, **kwargs) -> Trajectory:
    """Time evolution of a pumped graph from any normalised initial condition."""
    return solve_numeric(graph, t_grid, initial, **kwargs)
