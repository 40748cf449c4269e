"""Exact agent-based simulation of the death-birth decision dynamics.

One step: pick an agent uniformly at random, count how many of its k
neighbors currently decide 0, then let it adopt a neighbor's decision
with probability proportional to the neighbors' decision fitness.  The
adopt-0 probability therefore depends only on the agent's type and its
neighborhood count, so both fitness lotteries collapse into one cached
(type, count) table and the inner loop is a table lookup.

The loop is compiled with numba for throughput (a standard ensemble is
~10^7 update events); an interpreted twin of the kernel is reachable via
``_trial_loop.py_func`` and the tests drive both on identical random
arrays to pin them to each other.  All randomness comes from numpy
Generators seeded through SeedSequence tuples, so every trial is
reproducible bit for bit across runs and platforms, and ensembles derive
independent per-trial streams from one base seed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .model import GameParams, TypeProfile, fitness0, fitness1
from .network import RegularGraph, generate_regular

__all__ = [
    "SimState",
    "TrialResult",
    "EnsembleResult",
    "type_counts",
    "init_state",
    "step",
    "run_trial",
    "run_ensemble",
    "sample_step_deltas",
    "ensemble_trajectory_csv",
    "ensemble_summary_csv",
]

INITIAL_RULES = ("coin", "zeros", "ones")


def _as_seed_tuple(seed) -> tuple[int, ...]:
    if isinstance(seed, np.random.SeedSequence):
        return tuple(int(v) for v in seed.entropy) if isinstance(
            seed.entropy, (tuple, list)
        ) else (int(seed.entropy),)
    if isinstance(seed, (tuple, list)):
        return tuple(int(v) for v in seed)
    return (int(seed),)


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(_as_seed_tuple(seed)))


@lru_cache(maxsize=128)
def _adopt0_table(profile: TypeProfile, params: GameParams) -> np.ndarray:
    """(n_types, k+1) table of adopt-0 probabilities by neighborhood count.

    Entry [i, k0] is the exact lottery k0*f0 / (k0*f0 + (k-k0)*f1) for a
    type-i agent with k0 of k neighbors deciding 0; rows end exactly at
    0.0 and 1.0 so absorbing states stay absorbing under any draw in
    [0, 1).
    """
    k = params.k
    table = np.empty((profile.n_types, k + 1), dtype=np.float64)
    for i in range(profile.n_types):
        for k0 in range(k + 1):
            w0 = k0 * fitness0(i, k0, profile, params)
            w1 = (k - k0) * fitness1(i, k0, profile, params)
            table[i, k0] = w0 / (w0 + w1)
    table.setflags(write=False)
    return table


def type_counts(n: int, proportions: tuple[float, ...]) -> np.ndarray:
    """Integer agent counts per type by largest-remainder rounding.

    Deterministic: remainders tie toward the lower type index.  Raises if
    rounding leaves some type with zero agents, since the profile then
    cannot be realized at this population size.
    """
    raw = n * np.asarray(proportions, dtype=np.float64)
    base = np.floor(raw).astype(np.int64)
    short = n - int(base.sum())
    if short > 0:
        order = np.argsort(-(raw - base), kind="stable")
        base[order[:short]] += 1
    if (base <= 0).any():
        i = int(np.argmax(base <= 0))
        raise ValueError(
            f"type {i} receives 0 of {n} agents; population too small for its proportion"
        )
    return base


@dataclass
class SimState:
    """Mutable population state.

    decisions   : (n,) uint8 current decisions
    type_of     : (n,) int32 node -> type index
    counts      : (I,) int64 per-type number of agents deciding 0
    type_totals : (I,) int64 per-type number of agents
    step        : update events applied so far
    """

    decisions: np.ndarray
    type_of: np.ndarray
    counts: np.ndarray
    type_totals: np.ndarray
    step: int = 0

    @property
    def n(self) -> int:
        return self.decisions.shape[0]

    @property
    def x_total(self) -> float:
        """Population share of decision 0."""
        return float(self.counts.sum()) / self.n

    @property
    def x_per_type(self) -> tuple[float, ...]:
        """Within-type shares of decision 0."""
        return tuple(
            float(c) / int(t) for c, t in zip(self.counts, self.type_totals)
        )

    @property
    def absorbed(self) -> bool:
        total0 = int(self.counts.sum())
        return total0 == 0 or total0 == self.n


def init_state(
    graph: RegularGraph,
    profile: TypeProfile,
    params: GameParams,
    seed,
    initial_rule: str = "coin",
) -> SimState:
    """Assign types (largest-remainder counts, contiguous node blocks) and
    initial decisions.

    initial_rule: 'coin' draws each agent's decision by a fair coin from
    the seed's stream; 'zeros' / 'ones' start from the uniform states.
    The graph is exchangeable, so block type placement loses no
    generality.
    """
    if graph.n != params.n_agents or graph.k != params.k:
        raise ValueError(
            f"graph ({graph.n} nodes, degree {graph.k}) does not match "
            f"params ({params.n_agents} agents, degree {params.k})"
        )
    if initial_rule not in INITIAL_RULES:
        raise ValueError(f"initial_rule {initial_rule!r} not in {INITIAL_RULES}")
    totals = type_counts(params.n_agents, profile.proportions)
    type_of = np.repeat(
        np.arange(profile.n_types, dtype=np.int32), totals
    )
    n = params.n_agents
    if initial_rule == "coin":
        rng = _as_generator(seed)
        decisions = rng.integers(0, 2, size=n).astype(np.uint8)
    elif initial_rule == "zeros":
        decisions = np.zeros(n, dtype=np.uint8)
    else:
        decisions = np.ones(n, dtype=np.uint8)
    counts = np.zeros(profile.n_types, dtype=np.int64)
    np.add.at(counts, type_of[decisions == 0], 1)
    return SimState(
        decisions=decisions,
        type_of=type_of,
        counts=counts,
        type_totals=totals,
        step=0,
    )


@njit(cache=True, nogil=True)
def _trial_loop(
    neighbors,      # (n, k) int32
    decisions,      # (n,)  uint8, mutated
    type_of,        # (n,)  int32
    counts,         # (I,)  int64, mutated
    total0,         # int: current number of agents deciding 0
    adopt0,         # (I, k+1) float64 adopt-0 probability table
    agents,         # (S,) int64 pre-drawn revising agents
    lots,           # (S,) float64 pre-drawn uniforms in [0, 1)
    sample_every,   # int; 0 disables in-loop sampling
    sample_total,   # (M,) int64 out: total0 at sampled steps
    sample_counts,  # (M, I) int64 out: per-type counts at sampled steps
):
    n, k = neighbors.shape
    n_types = counts.shape[0]
    n_steps = agents.shape[0]
    steps_done = 0
    n_sampled = 0
    for s in range(n_steps):
        if total0 == 0 or total0 == n:
            break
        a = agents[s]
        k0 = 0
        for j in range(k):
            if decisions[neighbors[a, j]] == 0:
                k0 += 1
        ti = type_of[a]
        new = 0 if lots[s] < adopt0[ti, k0] else 1
        old = decisions[a]
        if new != old:
            decisions[a] = new
            if new == 0:
                counts[ti] += 1
                total0 += 1
            else:
                counts[ti] -= 1
                total0 -= 1
        steps_done = s + 1
        if sample_every > 0 and steps_done % sample_every == 0:
            sample_total[n_sampled] = total0
            for t2 in range(n_types):
                sample_counts[n_sampled, t2] = counts[t2]
            n_sampled += 1
    return steps_done, total0, n_sampled


def step(
    state: SimState,
    graph: RegularGraph,
    profile: TypeProfile,
    params: GameParams,
    rng: np.random.Generator,
) -> SimState:
    """Apply one update event in place and return the state.

    Kept for stepwise inspection and tests; bulk runs go through
    ``run_trial``, which applies the identical rule in compiled form.
    """
    adopt0 = _adopt0_table(profile, params)
    a = int(rng.integers(0, state.n))
    row = graph.adjacency[a]
    k0 = 0
    for w in row:
        if state.decisions[w] == 0:
            k0 += 1
    ti = int(state.type_of[a])
    new = 0 if rng.random() < adopt0[ti, k0] else 1
    old = int(state.decisions[a])
    if new != old:
        state.decisions[a] = new
        state.counts[ti] += 1 if new == 0 else -1
    state.step += 1
    return state


@dataclass(frozen=True)
class TrialResult:
    """One completed trial.

    trajectory_samples rows are (step, x_total, x_per_type); present only
    when sampling was requested, and always include step 0 and the final
    step.  ``seed`` is the normalized seed tuple that reproduces the
    trial exactly.
    """

    final_x: float
    final_x_per_type: tuple[float, ...]
    trajectory_samples: tuple[tuple[int, float, tuple[float, ...]], ...]
    absorbed: bool
    steps_run: int
    seed: tuple[int, ...]


def run_trial(
    graph: RegularGraph,
    profile: TypeProfile,
    params: GameParams,
    seed,
    max_steps: int = 100_000,
    sample_every: int = 0,
    initial_rule: str = "coin",
) -> TrialResult:
    """Run one trial of at most max_steps update events.

    Stops early once the population is unanimous (the dynamics are then
    frozen, so stopping is exact).  sample_every > 0 records the decision
    shares every that many events.  Identical arguments give identical
    results.
    """
    if max_steps < 1:
        raise ValueError(f"max_steps={max_steps} must be >= 1")
    if sample_every < 0:
        raise ValueError(f"sample_every={sample_every} must be >= 0")
    seed_t = _as_seed_tuple(seed)
    rng = _as_generator(seed_t)
    state = init_state(graph, profile, params, rng, initial_rule=initial_rule)
    adopt0 = _adopt0_table(profile, params)
    agents = rng.integers(0, state.n, size=max_steps)
    lots = rng.random(max_steps)
    n_slots = max_steps // sample_every + 1 if sample_every > 0 else 0
    sample_total = np.zeros(n_slots, dtype=np.int64)
    sample_counts = np.zeros((n_slots, profile.n_types), dtype=np.int64)
    first = (0, state.x_total, state.x_per_type)
    steps_done, total0, n_sampled = _trial_loop(
        graph.neighbor_matrix,
        state.decisions,
        state.type_of,
        state.counts,
        int(state.counts.sum()),
        adopt0,
        agents,
        lots,
        sample_every,
        sample_total,
        sample_counts,
    )
    state.step = steps_done
    samples: tuple[tuple[int, float, tuple[float, ...]], ...] = ()
    if sample_every > 0:
        rows = [first]
        totals = state.type_totals
        for m in range(n_sampled):
            s = (m + 1) * sample_every
            per_type = tuple(
                float(c) / int(t) for c, t in zip(sample_counts[m], totals)
            )
            rows.append((s, float(sample_total[m]) / state.n, per_type))
        if rows[-1][0] != steps_done:
            rows.append((steps_done, state.x_total, state.x_per_type))
        samples = tuple(rows)
    return TrialResult(
        final_x=state.x_total,
        final_x_per_type=state.x_per_type,
        trajectory_samples=samples,
        absorbed=state.absorbed,
        steps_run=steps_done,
        seed=seed_t,
    )


@dataclass(frozen=True)
class EnsembleResult:
    """Aggregate of independent trials at one parameter point."""

    results: tuple[TrialResult, ...]
    mean_final_x: float
    mean_final_x_per_type: tuple[float, ...]
    absorbed_fraction: float
    mean_steps_run: float

    @property
    def trials(self) -> int:
        return len(self.results)


def run_ensemble(
    profile: TypeProfile,
    params: GameParams,
    trials: int,
    base_seed,
    max_steps: int = 100_000,
    sample_every: int = 0,
    initial_rule: str = "coin",
    graph: RegularGraph | None = None,
    graph_per_trial: bool = True,
    graph_seed=None,
    workers: int = 1,
) -> EnsembleResult:
    """Run independent trials and aggregate final decision shares.

    Seeding: trial t uses base_seed + (0, t); its graph, when drawn per
    trial (the default), uses graph_seed-or-base_seed + (1, t); a single
    shared graph uses suffix (1,).  Passing ``graph`` pins the topology
    explicitly and skips generation.  Results are ordered by trial index
    and independent of ``workers``.
    """
    if trials <= 0:
        raise ValueError(f"trials={trials} must be positive")
    base = _as_seed_tuple(base_seed)
    gbase = base if graph_seed is None else _as_seed_tuple(graph_seed)
    shared = graph
    if shared is None and not graph_per_trial:
        shared = generate_regular(params.n_agents, params.k, gbase + (1,))

    def one(t: int) -> TrialResult:
        g = shared
        if g is None:
            g = generate_regular(params.n_agents, params.k, gbase + (1, t))
        return run_trial(
            g, profile, params, base + (0, t),
            max_steps=max_steps, sample_every=sample_every,
            initial_rule=initial_rule,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(one, range(trials)))
    else:
        results = tuple(one(t) for t in range(trials))
    finals = np.array([r.final_x for r in results])
    per_type = np.array([r.final_x_per_type for r in results])
    return EnsembleResult(
        results=results,
        mean_final_x=float(finals.mean()),
        mean_final_x_per_type=tuple(float(v) for v in per_type.mean(axis=0)),
        absorbed_fraction=float(np.mean([r.absorbed for r in results])),
        mean_steps_run=float(np.mean([r.steps_run for r in results])),
    )


def sample_step_deltas(
    state: SimState,
    graph: RegularGraph,
    profile: TypeProfile,
    params: GameParams,
    n_samples: int,
    seed,
) -> np.ndarray:
    """Monte Carlo one-step changes of the decision-0 count from a fixed
    state, as an (n_samples,) int8 array of -1/0/+1.

    Each sample draws a revising agent and a lottery uniform exactly as
    one simulation step would, without mutating the state; used to check
    the simulator's one-step expectation against closed-form enumeration.
    """
    rng = _as_generator(seed)
    adopt0 = _adopt0_table(profile, params)
    k0_all = (state.decisions[graph.neighbor_matrix] == 0).sum(axis=1)
    agents = rng.integers(0, state.n, size=n_samples)
    lots = rng.random(n_samples)
    new0 = lots < adopt0[state.type_of[agents], k0_all[agents]]
    old0 = state.decisions[agents] == 0
    return new0.astype(np.int8) - old0.astype(np.int8)


def ensemble_trajectory_csv(ens: EnsembleResult) -> str:
    """Per-trial sampled trajectories as CSV.

    Header trial,step,x_total,x_type_1..x_type_I; LF endings; shortest
    round-trip float formatting.  Trials run without sampling contribute
    no rows.
    """
    n_types = len(ens.mean_final_x_per_type)
    lines = [
        "trial,step,x_total,"
        + ",".join(f"x_type_{j + 1}" for j in range(n_types))
    ]
    for t, res in enumerate(ens.results):
        for s, x, per in res.trajectory_samples:
            lines.append(
                f"{t},{s},{x!r}," + ",".join(repr(v) for v in per)
            )
    return "\n".join(lines) + "\n"


def ensemble_summary_csv(
    ens: EnsembleResult, profile: TypeProfile, params: GameParams
) -> str:
    """One-row ensemble summary as CSV (header plus a single data row)."""
    n_types = len(ens.mean_final_x_per_type)
    header = (
        "n_agents,k,alpha,u,trials,mean_final_x,"
        + ",".join(f"mean_final_x_type_{j + 1}" for j in range(n_types))
        + ",absorbed_fraction,mean_steps_run"
    )
    row = (
        f"{params.n_agents},{params.k},{params.alpha!r},{params.u!r},"
        f"{ens.trials},{ens.mean_final_x!r},"
        + ",".join(repr(v) for v in ens.mean_final_x_per_type)
        + f",{ens.absorbed_fraction!r},{ens.mean_steps_run!r}"
    )
    return header + "\n" + row + "\n"
