"""Rate constants, manifold classes and the transition graphs built from them.

A graph node is a *class* of mutually orthogonal emitter-bath manifolds that
share identical dynamics. Each class carries one population variable which is
either the population of a single copy (``PER_COPY``, like the two-emitter
``W1``) or the sum over all copies (``AGGREGATED``). A transition fires from
any single copy of its source class into ``branches`` distinct target
manifolds, each at ``coefficient * rate(kind)``.

Coefficients are exact :class:`fractions.Fraction` values; physical rates are
only multiplied in when a rate matrix is materialised.
"""
from __future__ import annotations

import enum
import graphlib
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Real
from typing import Iterable

import numpy as np

from .errors import ValidationError

__all__ = [
    "Kind",
    "Semantics",
    "RateSet",
    "ManifoldClass",
    "Transition",
    "TransitionGraph",
    "build_two_emitter_graph",
    "build_three_emitter_graph",
    "build_independent_graph",
    "build_general_graph",
    "superradiant_graph",
    "graph_to_json",
    "graph_from_json",
]

GRAPH_SCHEMA = "srkinetics.graph/1"


class Kind(str, enum.Enum):
    RADIATIVE = "RADIATIVE"
    NONRADIATIVE = "NONRADIATIVE"
    PUMP = "PUMP"

    @property
    def quanta(self) -> int:
        """Change of the excitation number when a transition of this kind fires."""
        return 1 if self is Kind.PUMP else -1


class Semantics(str, enum.Enum):
    PER_COPY = "PER_COPY"
    AGGREGATED = "AGGREGATED"


@dataclass(frozen=True)
class RateSet:
    """Single-emitter radiative, non-radiative and pump rates (1/time).

    Values may be ``int``, ``float`` or ``Fraction``; exact types propagate
    through the Markov yield computation.
    """

    gamma_r: Real = 1.0
    gamma: Real = 0.0
    gamma_p: Real = 0.0

    def __post_init__(self):
        for name in ("gamma_r", "gamma", "gamma_p"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, Real):
                raise ValidationError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
        if not self.gamma_r > 0:
            raise ValidationError(f"gamma_r must be > 0, got {self.gamma_r!r}")
        if self.gamma < 0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma!r}")
        if self.gamma_p < 0:
            raise ValidationError(f"gamma_p must be >= 0, got {self.gamma_p!r}")

    @classmethod
    def from_ratio(cls, ratio, pump_ratio=0.0, gamma_r=1.0) -> "RateSet":
        """Rates from the dimensionless ratios gamma/gamma_r and gamma_p/gamma_r."""
        if isinstance(ratio, Real) and ratio < 0:
            raise ValidationError(f"ratio must be >= 0, got {ratio!r}")
        return cls(gamma_r=gamma_r, gamma=ratio * gamma_r, gamma_p=pump_ratio * gamma_r)

    @property
    def ratio(self):
        return self.gamma / self.gamma_r

    @property
    def pump_ratio(self):
        return self.gamma_p / self.gamma_r

    def rate(self, kind: Kind):
        if kind is Kind.RADIATIVE:
            return self.gamma_r
        if kind is Kind.NONRADIATIVE:
            return self.gamma
        return self.gamma_p

    def scaled(self, c) -> "RateSet":
        return RateSet(self.gamma_r * c, self.gamma * c, self.gamma_p * c)

    def as_dict(self) -> dict:
        return {"gamma_r": float(self.gamma_r), "gamma": float(self.gamma),
                "gamma_p": float(self.gamma_p)}


@dataclass(frozen=True)
class ManifoldClass:
    id: str
    label: str
    n_active: int
    k_excited: int
    degeneracy: int = 1
    semantics: Semantics = Semantics.PER_COPY

    def __post_init__(self):
        if self.n_active < 0 or not 0 <= self.k_excited <= self.n_active:
            raise ValidationError(
                f"class {self.id}: need 0 <= k_excited <= n_active, got "
                f"k={self.k_excited}, n_active={self.n_active}")
        if self.degeneracy < 1:
            raise ValidationError(f"class {self.id}: degeneracy must be >= 1")

    @property
    def weight(self) -> int:
        """Factor turning the population variable into total class probability."""
        return self.degeneracy if self.semantics is Semantics.PER_COPY else 1


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    kind: Kind
    coefficient: Fraction
    branches: int = 1

    def __post_init__(self):
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))
        if self.coefficient <= 0:
            raise ValidationError(
                f"{self.source}->{self.target}: coefficient must be > 0")
        if self.branches < 1:
            raise ValidationError(f"{self.source}->{self.target}: branches must be >= 1")

    @property
    def total_coefficient(self) -> Fraction:
        """Coefficient of the total outflow from one source copy along this edge."""
        return self.coefficient * self.branches

    @property
    def per_copy(self) -> bool:
        return True


@dataclass(frozen=True)
class TransitionGraph:
    """Immutable directed graph of manifold classes with the rates it was built for."""

    name: str
    n_emitters: int
    classes: tuple[ManifoldClass, ...]
    transitions: tuple[Transition, ...]
    ground_id: str
    rates: RateSet = field(default_factory=RateSet)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        ids = [c.id for c in self.classes]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"{self.name}: duplicate class ids")
        by_id = {c.id: c for c in self.classes}
        if self.ground_id not in by_id or by_id[self.ground_id].k_excited != 0:
            raise ValidationError(f"{self.name}: ground class must exist with k_excited=0")
        if sum(c.k_excited == 0 for c in self.classes) != 1:
            raise ValidationError(f"{self.name}: exactly one class may have k_excited=0")
        top = [c for c in self.classes
               if c.k_excited == self.n_emitters and c.n_active == self.n_emitters]
        if len(top) != 1:
            raise ValidationError(f"{self.name}: exactly one initial class required")
        seen = set()
        for t in self.transitions:
            if t.source not in by_id or t.target not in by_id:
                raise ValidationError(f"{self.name}: dangling transition {t}")
            key = (t.source, t.target, t.kind)
            if key in seen:
                raise ValidationError(f"{self.name}: duplicate transition {key}")
            seen.add(key)
            dk = by_id[t.target].k_excited - by_id[t.source].k_excited
            if dk != t.kind.quanta:
                raise ValidationError(
                    f"{self.name}: {t.kind.value} {t.source}->{t.target} changes "
                    f"excitation by {dk}")
        if not isinstance(self.rates, RateSet):
            raise ValidationError("rates must be a RateSet")

    # -- lookup -----------------------------------------------------------
    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.classes)

    def index(self, class_id: str) -> int:
        for i, c in enumerate(self.classes):
            if c.id == class_id or c.label == class_id:
                return i
        raise KeyError(class_id)

    def get(self, class_id: str) -> ManifoldClass:
        return self.classes[self.index(class_id)]

    @property
    def initial_id(self) -> str:
        return next(c.id for c in self.classes
                    if c.k_excited == self.n_emitters and c.n_active == self.n_emitters)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.classes], dtype=float)

    @property
    def has_pump(self) -> bool:
        return any(t.kind is Kind.PUMP for t in self.transitions)

    def outgoing(self, class_id: str) -> list[Transition]:
        return [t for t in self.transitions if t.source == class_id]

    def with_rates(self, rates: RateSet) -> "TransitionGraph":
        return replace(self, rates=rates)

    # -- structure --------------------------------------------------------
    def topological_order(self) -> list[str]:
        """Class ids in cascade order; raises ``graphlib.CycleError`` when cyclic."""
        sorter = graphlib.TopologicalSorter()
        for c in self.classes:
            sorter.add(c.id)
        for t in self.transitions:
            sorter.add(t.target, t.source)
        return list(sorter.static_order())

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except graphlib.CycleError:
            return False
        return True

    # -- matrices ---------------------------------------------------------
    def coefficient_matrices(self) -> dict[Kind, list[list[Fraction]]]:
        """Exact generator coefficients per kind, rows/cols in class order.

        ``d x_i/dt = sum_kind rate(kind) * sum_j C[kind][i][j] x_j`` where
        ``x`` holds each class's population variable (ground included).
        """
        n = len(self.classes)
        pos = {c.id: i for i, c in enumerate(self.classes)}
        w = [c.weight for c in self.classes]
        mats = {k: [[Fraction(0)] * n for _ in range(n)] for k in Kind}
        for t in self.transitions:
            s, d = pos[t.source], pos[t.target]
            out = t.total_coefficient
            m = mats[t.kind]
            m[s][s] -= out
            m[d][s] += out * Fraction(w[s], w[d])
        return mats

    def rate_matrix(self, rates: RateSet | None = None) -> np.ndarray:
        """Float generator matrix for the population variables (ground included)."""
        rates = self.rates if rates is None else rates
        mats = self.coefficient_matrices()
        out = np.zeros((len(self.classes),) * 2)
        for kind, m in mats.items():
            out += float(rates.rate(kind)) * np.array(m, dtype=float)
        return out


def _validate_n(n):
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError(f"number of emitters must be an integer >= 1, got {n!r}")


def _require_no_pump(rates: RateSet, what: str):
    if rates.gamma_p != 0:
        raise ValidationError(
            f"{what} is defined without pump; use pump.build_pumped_two_emitter_graph")


def build_two_emitter_graph(rates: RateSet) -> TransitionGraph:
    """Four-class two-emitter cascade (double excitation, W+, W1 copies, ground)."""
    _require_no_pump(rates, "two-emitter graph")
    R, N = Kind.RADIATIVE, Kind.NONRADIATIVE
    classes = (
        ManifoldClass("W2", "W2", 2, 2),
        ManifoldClass("Wp", "W+", 2, 1),
        ManifoldClass("W1", "W1", 1, 1, degeneracy=2),
        ManifoldClass("W0", "W0", 0, 0),
    )
    transitions = (
        Transition("W2", "Wp", R, 2),
        Transition("W2", "W1", N, 1, branches=2),
        # two phonon baths at gamma/2 each
        Transition("Wp", "W0", R, 2),
        Transition("Wp", "W0", N, Fraction(1, 2), branches=2),
        Transition("W1", "W0", R, 1),
        Transition("W1", "W0", N, 1),
    )
    return TransitionGraph("two_emitter", 2, classes, transitions, "W0", rates)


def build_three_emitter_graph(rates: RateSet) -> TransitionGraph:
    """Eight-class three-emitter cascade keeping photon- and phonon-tagged
    two-emitter symmetric states distinct."""
    _require_no_pump(rates, "three-emitter graph")
    R, N = Kind.RADIATIVE, Kind.NONRADIATIVE
    classes = (
        ManifoldClass("W3", "W3", 3, 3),
        ManifoldClass("Ws32", "Ws(3,2)", 3, 2),
        ManifoldClass("Ws31", "Ws(3,1)", 3, 1),
        ManifoldClass("Wsn21", "Wsn(2,1)", 2, 1, degeneracy=3),
        ManifoldClass("W2", "W2", 2, 2, degeneracy=3),
        ManifoldClass("Wsr21", "Wsr(2,1)", 2, 1, degeneracy=3),
        ManifoldClass("W1", "W1", 1, 1, degeneracy=6),
        ManifoldClass("W0", "W0", 0, 0),
    )
    transitions = (
        Transition("W3", "Ws32", R, 3),
        Transition("W3", "W2", N, 1, branches=3),
        Transition("Ws32", "Ws31", R, 4),
        Transition("Ws32", "Wsn21", N, Fraction(2, 3), branches=3),
        Transition("Ws31", "W0", R, 3),
        Transition("Ws31", "W0", N, 1),
        Transition("Wsn21", "W0", R, 2),
        Transition("Wsn21", "W0", N, 1),
        Transition("W2", "Wsr21", R, 2),
        Transition("W2", "W1", N, 1, branches=2),
        Transition("Wsr21", "W0", R, 2),
        Transition("Wsr21", "W0", N, 1),
        Transition("W1", "W0", R, 1),
        Transition("W1", "W0", N, 1),
    )
    return TransitionGraph("three_emitter", 3, classes, transitions, "W0", rates)


def build_independent_graph(n: int, rates: RateSet) -> TransitionGraph:
    """n non-interacting emitters; class ``m`` aggregates all states with m excited."""
    _validate_n(n)
    _require_no_pump(rates, "independent graph")
    classes = tuple(
        ManifoldClass(f"I{m}", f"I({m})", n, m, degeneracy=math.comb(n, m),
                      semantics=Semantics.AGGREGATED)
        for m in range(n, -1, -1))
    transitions = []
    for m in range(n, 0, -1):
        transitions.append(Transition(f"I{m}", f"I{m - 1}", Kind.RADIATIVE, m))
        transitions.append(Transition(f"I{m}", f"I{m - 1}", Kind.NONRADIATIVE, m))
    return TransitionGraph(f"independent_{n}", n, classes, tuple(transitions), "I0", rates)


def _general_id(n_active: int, k: int) -> str:
    return "G" if k == 0 else f"V{n_active}_{k}"


def build_general_graph(n: int, rates: RateSet) -> TransitionGraph:
    """Aggregated symmetric-family cascade for any number of emitters.

    Node ``V(m,k)`` is the total population of all symmetric ``k``-excitation
    states of ``m`` still-active emitters. Radiative decay stays in the family
    with Dicke enhancement ``k(m-k+1)``; non-radiative decay retires one emitter,
    total coefficient ``k`` spread evenly over the ``m`` phonon baths.
    """
    _validate_n(n)
    _require_no_pump(rates, "general graph")
    nodes = [(m, k) for m in range(n, 0, -1) for k in range(m, 0, -1)]
    # degeneracy = number of distinct bath histories reaching a node
    degeneracy = {(n, n): 1}
    for m, k in nodes:
        if (m, k) == (n, n):
            continue
        d = 0
        if k + 1 <= m:
            d += degeneracy.get((m, k + 1), 0)
        if m + 1 <= n:
            d += degeneracy.get((m + 1, k + 1), 0) * (m + 1)
        degeneracy[(m, k)] = d
    classes = [ManifoldClass(_general_id(m, k), f"V({m},{k})", m, k,
                             degeneracy=degeneracy[(m, k)],
                             semantics=Semantics.AGGREGATED)
               for m, k in nodes]
    classes.append(ManifoldClass("G", "V(0)", 0, 0, semantics=Semantics.AGGREGATED))
    transitions = []
    for m, k in nodes:
        src = _general_id(m, k)
        transitions.append(Transition(src, _general_id(m, k - 1), Kind.RADIATIVE,
                                      k * (m - k + 1)))
        transitions.append(Transition(src, _general_id(m - 1, k - 1), Kind.NONRADIATIVE, k))
    return TransitionGraph(f"general_{n}", n, tuple(classes), tuple(transitions), "G", rates)


def superradiant_graph(n: int, rates: RateSet, kind: str = "explicit") -> TransitionGraph:
    """Explicit per-state graph for n=2,3 (``kind="explicit"``), the aggregated one otherwise."""
    _validate_n(n)
    if kind not in ("explicit", "general"):
        raise ValidationError(f"unknown graph kind {kind!r}")
    if kind == "explicit" and n == 2:
        return build_two_emitter_graph(rates)
    if kind == "explicit" and n == 3:
        return build_three_emitter_graph(rates)
    return build_general_graph(n, rates)


# -- serialisation --------------------------------------------------------

def graph_to_dict(graph: TransitionGraph) -> dict:
    return {
        "schema": GRAPH_SCHEMA,
        "name": graph.name,
        "n_emitters": graph.n_emitters,
        "ground_id": graph.ground_id,
        "initial_id": graph.initial_id,
        "rates": graph.rates.as_dict(),
        "classes": [
            {"id": c.id, "label": c.label, "n_active": c.n_active,
             "k_excited": c.k_excited, "degeneracy": c.degeneracy,
             "population_semantics": c.semantics.value}
            for c in graph.classes],
        "transitions": [
            {"from": t.source, "to": t.target, "kind": t.kind.value,
             "coefficient": [t.coefficient.numerator, t.coefficient.denominator],
             "branches": t.branches}
            for t in graph.transitions],
    }


def graph_to_json(graph: TransitionGraph, indent: int | None = 2) -> str:
    return json.dumps(graph_to_dict(graph), indent=indent)


def graph_from_dict(data: dict) -> TransitionGraph:
    if data.get("schema") != GRAPH_SCHEMA:
        raise ValidationError(f"unsupported graph schema {data.get('schema')!r}")
    try:
        classes = tuple(
            ManifoldClass(c["id"], c["label"], int(c["n_active"]), int(c["k_excited"]),
                          int(c["degeneracy"]), Semantics(c["population_semantics"]))
            for c in data["classes"])
        transitions = tuple(
            Transition(t["from"], t["to"], Kind(t["kind"]),
                       Fraction(int(t["coefficient"][0]), int(t["coefficient"][1])),
                       int(t.get("branches", 1)))
            for t in data["transitions"])
        rates = RateSet(**data["rates"])
        return TransitionGraph(data["name"], int(data["n_emitters"]), classes,
                               transitions, data["ground_id"], rates)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed graph document: {exc}") from exc


def graph_from_json(text: str) -> TransitionGraph:
    return graph_from_dict(json.loads(text))


def iter_edges(graph: TransitionGraph, kinds: Iterable[Kind] | None = None):
    kinds = set(Kind) if kinds is None else set(kinds)
    return (t for t in graph.transitions if t.kind in kinds)
