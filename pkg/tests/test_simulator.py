"""Agent-based death-birth simulator: state setup, single steps, the
compiled trial loop against its interpreted twin, ensembles, and CSV
export."""

from __future__ import annotations

import math

import numpy as np
import pytest

from evodetect.meanfield import integrate
from evodetect.model import GameParams, TypeProfile, transition_prob_exact
from evodetect.network import generate_regular
from evodetect.simulator import (
    EnsembleResult,
    SimState,
    TrialResult,
    _adopt0_table,
    _as_seed_tuple,
    _trial_loop,
    ensemble_summary_csv,
    ensemble_trajectory_csv,
    init_state,
    run_ensemble,
    run_trial,
    sample_step_deltas,
    step,
    type_counts,
)

SMALL = GameParams(k=4, u=0.5, alpha=0.05, n_agents=60)
PROF2 = TypeProfile((0.2, 0.6), (0.5, 0.5))


class _ForcedRng:
    """Stands in for a Generator: fixed revising agent, fixed lottery."""

    def __init__(self, agent=0, lot=0.5):
        self.agent = agent
        self.lot = lot

    def integers(self, low, high=None, size=None):
        if size is None:
            return self.agent
        return np.full(size, self.agent, dtype=np.int64)

    def random(self, size=None):
        if size is None:
            return self.lot
        return np.full(size, self.lot)


def test_type_counts_largest_remainder():
    assert type_counts(10, (0.3, 0.7)).tolist() == [3, 7]
    assert type_counts(10, (1 / 3, 1 / 3, 1 / 3)).tolist() == [4, 3, 3]
    assert type_counts(1000, (0.5, 0.5)).tolist() == [500, 500]
    with pytest.raises(ValueError):
        type_counts(10, (0.01, 0.99))  # first type would get zero agents


def test_init_state_rules_and_counts():
    g = generate_regular(SMALL.n_agents, SMALL.k, seed=1)
    ones = init_state(g, PROF2, SMALL, 0, initial_rule="ones")
    assert ones.x_total == 0.0 and ones.absorbed
    zeros = init_state(g, PROF2, SMALL, 0, initial_rule="zeros")
    assert zeros.x_total == 1.0 and zeros.absorbed
    coin = init_state(g, PROF2, SMALL, 42, initial_rule="coin")
    recount = np.zeros(2, dtype=np.int64)
    np.add.at(recount, coin.type_of[coin.decisions == 0], 1)
    assert coin.counts.tolist() == recount.tolist()
    assert coin.type_totals.tolist() == [30, 30]
    big = GameParams(k=20, u=0.5, alpha=0.05, n_agents=1000)
    gb = generate_regular(1000, 20, seed=0)
    st = init_state(gb, PROF2, big, 7, initial_rule="coin")
    assert abs(st.x_total - 0.5) <= 0.05


def test_init_state_rejects_mismatch_and_bad_rule():
    g = generate_regular(SMALL.n_agents, SMALL.k, seed=1)
    with pytest.raises(ValueError):
        init_state(g, PROF2, GameParams(k=4, u=0.5, alpha=0.05, n_agents=80), 0)
    with pytest.raises(ValueError):
        init_state(g, PROF2, SMALL, 0, initial_rule="random")


def test_adopt0_table_boundary_columns_exact():
    table = _adopt0_table(PROF2, SMALL)
    assert table.shape == (2, SMALL.k + 1)
    assert np.all(table[:, 0] == 0.0)
    assert np.all(table[:, SMALL.k] == 1.0)
    for i in range(2):
        for k0 in range(SMALL.k + 1):
            want = 1.0 - transition_prob_exact(i, k0, PROF2, SMALL)
            assert table[i, k0] == pytest.approx(want, abs=1e-15)
    assert not table.flags.writeable


def test_step_leaves_absorbed_state_alone():
    g = generate_regular(SMALL.n_agents, SMALL.k, seed=2)
    st = init_state(g, PROF2, SMALL, 0, initial_rule="ones")
    rng = np.random.default_rng(5)
    before = st.decisions.copy()
    for _ in range(50):
        step(st, g, PROF2, SMALL, rng)
    assert np.array_equal(st.decisions, before)
    assert st.counts.tolist() == [0, 0]
    assert st.step == 50


def test_step_forced_switch_both_directions():
    prof = TypeProfile((0.3,), (1.0,))
    params = GameParams(k=3, u=0.5, alpha=0.05, n_agents=4)
    g = generate_regular(4, 3, seed=0)  # complete graph
    st = init_state(g, prof, params, 0, initial_rule="zeros")
    st.decisions[:] = [0, 1, 1, 1]
    st.counts[:] = [1]
    # agent 0 revises: no neighbor decides 0, adopt-0 prob is exactly 0
    step(st, g, prof, params, _ForcedRng(agent=0, lot=0.0))
    assert st.decisions.tolist() == [1, 1, 1, 1]
    assert st.counts.tolist() == [0]
    st.decisions[:] = [1, 0, 0, 0]
    st.counts[:] = [3]
    # all neighbors decide 0, adopt-0 prob is exactly 1
    step(st, g, prof, params, _ForcedRng(agent=0, lot=0.999999))
    assert st.decisions.tolist() == [0, 0, 0, 0]
    assert st.counts.tolist() == [4]


def test_run_trial_validation_and_short_run():
    g = generate_regular(SMALL.n_agents, SMALL.k, seed=3)
    with pytest.raises(ValueError):
        run_trial(g, PROF2, SMALL, 0, max_steps=0)
    with pytest.raises(ValueError):
        run_trial(g, PROF2, SMALL, 0, sample_every=-1)
    r = run_trial(g, PROF2, SMALL, 9, max_steps=1)
    assert r.steps_run == 1 and not r.absorbed
    frozen = run_trial(g, PROF2, SMALL, 9, max_steps=50, initial_rule="zeros")
    assert frozen.steps_run == 0 and frozen.absorbed and frozen.final_x == 1.0


def test_run_trial_deterministic_and_seed_forms():
    g = generate_regular(SMALL.n_agents, SMALL.k, seed=3)
    a = run_trial(g, PROF2, SMALL, 7, max_steps=4000)
    b = run_trial(g, PROF2, SMALL, 7, max_steps=4000)
    assert a == b
    c = run_trial(g, PROF2, SMALL, (7,), max_steps=4000)
    assert a == c and a.seed == (7,)
    d = run_trial(g, PROF2, SMALL, 8, max_steps=4000)
    assert a != d


def test_run_trial_absorption_consistency():
    g = generate_regular(SMALL.n_agents, SMALL.k, seed=4)
    r = run_trial(g, PROF2, SMALL, 1, max_steps=20_000)
    assert r.absorbed
    assert r.final_x in (0.0, 1.0)
    assert r.steps_run < 20_000
    assert all(v == r.final_x for v in r.final_x_per_type)


def test_trial_loop_compiled_matches_interpreted():
    g = generate_regular(60, 4, seed=6)
    prof = TypeProfile((0.25, 0.7), (0.5, 0.5))
    params = GameParams(k=4, u=0.5, alpha=0.05, n_agents=60)
    rng = np.random.default_rng(123)
    st = init_state(g, prof, params, rng)
    adopt0 = _adopt0_table(prof, params)
    steps = 3000
    agents = rng.integers(0, 60, size=steps)
    lots = rng.random(steps)

    def pack():
        return (
            st.decisions.copy(), st.counts.copy(),
            np.zeros(steps // 100, dtype=np.int64),
            np.zeros((steps // 100, 2), dtype=np.int64),
        )

    dec_c, cnt_c, tot_c, per_c = pack()
    out_c = _trial_loop(
        g.neighbor_matrix, dec_c, st.type_of, cnt_c,
        int(cnt_c.sum()), adopt0, agents, lots, 100, tot_c, per_c,
    )
    dec_p, cnt_p, tot_p, per_p = pack()
    out_p = _trial_loop.py_func(
        g.neighbor_matrix, dec_p, st.type_of, cnt_p,
        int(cnt_p.sum()), adopt0, agents, lots, 100, tot_p, per_p,
    )
    assert tuple(out_c) == tuple(out_p)
    assert np.array_equal(dec_c, dec_p)
    assert np.array_equal(cnt_c, cnt_p)
    assert np.array_equal(tot_c, tot_p)
    assert np.array_equal(per_c, per_p)


def test_trajectory_samples_well_formed():
    g = generate_regular(SMALL.n_agents, SMALL.k, seed=8)
    r = run_trial(g, PROF2, SMALL, 21, max_steps=5000, sample_every=250)
    rows = r.trajectory_samples
    assert rows[0][0] == 0
    assert rows[-1][0] == r.steps_run
    steps = [s for s, _, _ in rows]
    assert steps == sorted(steps)
    for s, x, per in rows[:-1]:
        assert s % 250 == 0
    weights = np.array([30, 30]) / 60
    for s, x, per in rows:
        assert abs(float(np.dot(weights, per)) - x) <= 1e-12
    plain = run_trial(g, PROF2, SMALL, 21, max_steps=5000)
    assert plain.trajectory_samples == ()
    assert plain.final_x == r.final_x


def test_ensemble_matches_manual_seed_derivation():
    ens = run_ensemble(PROF2, SMALL, trials=1, base_seed=77, max_steps=3000)
    g = generate_regular(60, 4, seed=(77, 1, 0))
    manual = run_trial(g, PROF2, SMALL, (77, 0, 0), max_steps=3000)
    assert ens.results[0] == manual
    assert ens.mean_final_x == manual.final_x


def test_ensemble_reproducible_and_worker_invariant():
    kw = dict(trials=6, base_seed=SMALL.k, max_steps=3000)
    a = run_ensemble(PROF2, SMALL, **kw)
    b = run_ensemble(PROF2, SMALL, **kw)
    assert a.results == b.results
    c = run_ensemble(PROF2, SMALL, workers=2, **kw)
    assert a.results == c.results
    assert a.trials == 6
    with pytest.raises(ValueError):
        run_ensemble(PROF2, SMALL, trials=0, base_seed=1)


def test_ensemble_fixed_graph_modes():
    shared = run_ensemble(
        PROF2, SMALL, trials=3, base_seed=5, max_steps=2000,
        graph_per_trial=False, graph_seed=99,
    )
    pinned_graph = generate_regular(60, 4, seed=(99, 1))
    pinned = run_ensemble(
        PROF2, SMALL, trials=3, base_seed=5, max_steps=2000,
        graph=pinned_graph,
    )
    assert shared.results == pinned.results
    per_trial = run_ensemble(
        PROF2, SMALL, trials=3, base_seed=5, max_steps=2000,
    )
    assert per_trial.results != shared.results


def test_negative_discriminant_scenario_reaches_one():
    # two types with beliefs 0.2 / 0.9 lean the population toward
    # decision 0, so the share deciding 0 ends near 1
    prof = TypeProfile((0.2, 0.9), (0.5, 0.5))
    params = GameParams(k=20, u=0.5, alpha=0.05, n_agents=1000)
    ens = run_ensemble(prof, params, trials=6, base_seed=3110, max_steps=100_000)
    assert ens.mean_final_x >= 0.85
    assert ens.absorbed_fraction == 1.0


def test_ensemble_tracks_continuum_limit():
    prof = TypeProfile((0.2, 0.4), (0.5, 0.5))
    params = GameParams(k=20, u=0.5, alpha=0.05, n_agents=1000)
    every = 2500
    horizon = 100_000
    ens = run_ensemble(
        prof, params, trials=30, base_seed=515,
        max_steps=horizon, sample_every=every,
    )
    grid = np.arange(0, horizon + 1, every)
    filled = np.empty((ens.trials, grid.size))
    for t, res in enumerate(ens.results):
        rows = res.trajectory_samples
        j = 0
        last = rows[0][1]
        for gi, s in enumerate(grid):
            while j < len(rows) and rows[j][0] <= s:
                last = rows[j][1]
                j += 1
            filled[t, gi] = last
    mean_path = filled.mean(axis=0)
    traj = integrate(prof, params, x0=0.5, t_end=float(horizon),
                     n_samples=grid.size)
    # the continuum rate linearizes the lottery in the learning rate, so
    # mid-transit speeds differ at working rates; destinations agree
    assert np.max(np.abs(mean_path - traj.x_total)) <= 0.3
    assert abs(mean_path[-1] - traj.x_total[-1]) <= 0.05
    assert mean_path[-1] <= 0.05  # positive-lean profile empties decision 0
    assert np.all(np.diff(mean_path) <= 1e-9)  # mean path decays throughout


def test_sample_step_deltas_shape_and_frozen_state():
    g = generate_regular(SMALL.n_agents, SMALL.k, seed=14)
    st = init_state(g, PROF2, SMALL, 33)
    before = st.decisions.copy()
    d = sample_step_deltas(st, g, PROF2, SMALL, 5000, seed=2)
    assert d.shape == (5000,) and d.dtype == np.int8
    assert set(np.unique(d)).issubset({-1, 0, 1})
    assert np.array_equal(st.decisions, before)
    ones = init_state(g, PROF2, SMALL, 0, initial_rule="ones")
    assert np.all(sample_step_deltas(ones, g, PROF2, SMALL, 100, seed=2) == 0)


def test_trajectory_csv_format():
    ens = run_ensemble(
        PROF2, SMALL, trials=2, base_seed=8, max_steps=1000, sample_every=200,
    )
    text = ensemble_trajectory_csv(ens)
    lines = text.strip().split("\n")
    assert lines[0] == "trial,step,x_total,x_type_1,x_type_2"
    want_rows = sum(len(r.trajectory_samples) for r in ens.results)
    assert len(lines) == 1 + want_rows
    assert text.endswith("\n") and "\r" not in text
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "0"
    assert float(first[2]) == ens.results[0].trajectory_samples[0][1]


def test_summary_csv_format():
    ens = run_ensemble(PROF2, SMALL, trials=2, base_seed=8, max_steps=1000)
    text = ensemble_summary_csv(ens, PROF2, SMALL)
    lines = text.strip().split("\n")
    assert len(lines) == 2
    head = lines[0].split(",")
    row = lines[1].split(",")
    assert head[:6] == ["n_agents", "k", "alpha", "u", "trials", "mean_final_x"]
    assert row[0] == "60" and row[1] == "4" and row[4] == "2"
    assert float(row[5]) == ens.mean_final_x
    assert head[-2:] == ["absorbed_fraction", "mean_steps_run"]


def test_seed_tuple_normalization():
    assert _as_seed_tuple(5) == (5,)
    assert _as_seed_tuple((5, 2)) == (5, 2)
    assert _as_seed_tuple(np.random.SeedSequence((4, 1))) == (4, 1)
