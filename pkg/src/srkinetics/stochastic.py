"""Exact jump-process (Gillespie) simulation of a cascade.

Random numbers come from the counter-based Philox generator. Trajectory ``i``
belongs to block ``i // BLOCK_SIZE``; block ``b`` draws from
``Philox(SeedSequence(seed, spawn_key=(b,)))``. Every round of the block
consumes ``2 * BLOCK_SIZE`` uniforms (waiting time row, branch row) whether or
not a slot is still active, so the numbers a trajectory sees depend only on
``(seed, i)``. Blocks are independent and their integer accumulators add
exactly, so serial and threaded runs agree bit for bit.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import SRKineticsError, UnsupportedGraphError, ValidationError
from .kinetics import power_expsum
from .model import Kind, TransitionGraph

__all__ = ["EnsembleStats", "simulate_ensemble", "binned_power", "rate_chi2", "BLOCK_SIZE"]

BLOCK_SIZE = 1 << 16


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


@dataclass
class EnsembleStats:
    n_trajectories: int
    n_emitters: int
    photon_count_histogram: np.ndarray
    phonon_count_histogram: np.ndarray
    mean_photons: float
    sem_photons: float
    bin_edges: np.ndarray
    binned_rate: np.ndarray
    binned_rate_sem: np.ndarray
    rng_seed: int

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


@dataclass
class _Acc:
    photon_hist: np.ndarray
    phonon_hist: np.ndarray
    bin_sum: np.ndarray
    bin_sq: np.ndarray

    def __add__(self, other):
        return _Acc(self.photon_hist + other.photon_hist, self.phonon_hist + other.phonon_hist,
                    self.bin_sum + other.bin_sum, self.bin_sq + other.bin_sq)


def _tables(graph: TransitionGraph):
    n = len(graph.classes)
    out = [graph.outgoing(c.id) for c in graph.classes]
    width = max(1, max(len(o) for o in out))
    total = np.zeros(n)
    cum = np.full((n, width), np.inf)
    target = np.zeros((n, width), dtype=np.int64)
    radiative = np.zeros((n, width), dtype=bool)
    for i, edges in enumerate(out):
        rates = np.array([float(t.total_coefficient) * float(graph.rates.rate(t.kind))
                          for t in edges])
        if not edges:
            continue
        total[i] = rates.sum()
        if total[i] <= 0:
            raise UnsupportedGraphError(f"class {graph.classes[i].id} never decays")
        c = np.cumsum(rates) / total[i]
        c[-1] = 1.0
        cum[i, :len(edges)] = c
        for j, t in enumerate(edges):
            target[i, j] = graph.index(t.target)
            radiative[i, j] = t.kind is Kind.RADIATIVE
    return total, cum, target, radiative


def _run_block(graph, tables, seed, block, n_real, edges):
    total, cum, target, radiative = tables
    N = graph.n_emitters
    B = BLOCK_SIZE
    gen = block_generator(seed, block)
    ground = graph.index(graph.ground_id)
    state = np.full(B, graph.index(graph.initial_id), dtype=np.int64)
    t = np.zeros(B)
    photons = np.zeros(B, dtype=np.int64)
    phonons = np.zeros(B, dtype=np.int64)
    active = np.zeros(B, dtype=bool)
    active[:n_real] = True
    nbins = len(edges) - 1
    t_max, width = edges[-1], edges[1] - edges[0]
    keys = []
    for _ in range(N):
        if not active.any():
            break
        u = gen.random((2, B))
        idx = np.flatnonzero(active)
        s = state[idx]
        t[idx] += -np.log1p(-u[0, idx]) / total[s]
        branch = (u[1, idx][:, None] >= cum[s]).sum(axis=1)
        rad = radiative[s, branch]
        photons[idx[rad]] += 1
        phonons[idx[~rad]] += 1
        emit = idx[rad]
        te = t[emit]
        inside = te < t_max
        b = np.minimum((te[inside] / width).astype(np.int64), nbins - 1)
        keys.append(emit[inside] * nbins + b)
        state[idx] = target[s, branch]
        active[idx] = state[idx] != ground
    if active.any():
        raise SRKineticsError("trajectory did not reach ground within N jumps")
    real = slice(0, n_real)
    if np.any(photons[real] + phonons[real] != N):
        raise SRKineticsError("photon + phonon count differs from the number of emitters")
    bin_sum = np.zeros(nbins, dtype=np.int64)
    bin_sq = np.zeros(nbins, dtype=np.int64)
    if keys:
        uniq, counts = np.unique(np.concatenate(keys), return_counts=True)
        np.add.at(bin_sum, uniq % nbins, counts)
        np.add.at(bin_sq, uniq % nbins, counts * counts)
    return _Acc(np.bincount(photons[real], minlength=N + 1),
                np.bincount(phonons[real], minlength=N + 1), bin_sum, bin_sq)


def simulate_ensemble(graph: TransitionGraph, n_traj: int, seed: int = 0, *,
                      n_bins: int = 200, t_max: float | None = None,
                      workers: int = 1) -> EnsembleStats:
    """Simulate ``n_traj`` independent cascades from the top class to ground.

    Photon emission times are histogrammed on ``n_bins`` uniform bins over
    ``[0, t_max]`` (default ``10/gamma_r``); later emissions are counted in the
    photon totals but not in the rate estimate.
    """
    if graph.has_pump or not graph.is_acyclic():
        raise UnsupportedGraphError("stochastic simulation needs an unpumped cascade")
    if isinstance(n_traj, bool) or not isinstance(n_traj, (int, np.integer)) or n_traj < 1:
        raise ValidationError(f"n_traj must be a positive integer, got {n_traj!r}")
    if n_bins < 1:
        raise ValidationError("n_bins must be >= 1")
    t_max = 10.0 / float(graph.rates.gamma_r) if t_max is None else float(t_max)
    edges = np.linspace(0.0, t_max, n_bins + 1)
    tables = _tables(graph)
    n_blocks = -(-n_traj // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, n_traj - b * BLOCK_SIZE) for b in range(n_blocks)]

    def job(b):
        return _run_block(graph, tables, seed, b, sizes[b], edges)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(n_blocks)))
    else:
        parts = [job(b) for b in range(n_blocks)]
    acc = parts[0]
    for p in parts[1:]:
        acc = acc + p

    N = graph.n_emitters
    k = np.arange(N + 1)
    n = n_traj
    mean = float(acc.photon_hist @ k / n)
    var = float(acc.photon_hist @ (k - mean) ** 2 / (n - 1)) if n > 1 else 0.0
    width = edges[1] - edges[0]
    bin_mean = acc.bin_sum / n
    bin_var = (acc.bin_sq - acc.bin_sum * bin_mean) / (n - 1) if n > 1 else np.zeros(n_bins)
    return EnsembleStats(
        n_trajectories=n, n_emitters=N,
        photon_count_histogram=acc.photon_hist, phonon_count_histogram=acc.phonon_hist,
        mean_photons=mean, sem_photons=float(np.sqrt(var / n)),
        bin_edges=edges, binned_rate=bin_mean / width,
        binned_rate_sem=np.sqrt(np.maximum(bin_var, 0) / n) / width, rng_seed=seed)


def binned_power(graph: TransitionGraph, edges) -> np.ndarray:
    """Exact radiated power averaged over each bin."""
    cum = power_expsum(graph).cumulative(np.asarray(edges, dtype=float))
    return np.diff(cum) / np.diff(edges)


def rate_chi2(ens: EnsembleStats, graph: TransitionGraph) -> tuple[float, int, float]:
    """Chi-square of the binned emission rate against the exact power.

    Returns ``(chi2, dof, p_value)``; bins without recorded emissions are skipped.
    """
    exact = binned_power(graph, ens.bin_edges)
    ok = ens.binned_rate_sem > 0
    chi2 = float(np.sum(((ens.binned_rate[ok] - exact[ok]) / ens.binned_rate_sem[ok]) ** 2))
    dof = int(ok.sum())
    return chi2, dof, float(sps.chi2.sf(chi2, dof))
