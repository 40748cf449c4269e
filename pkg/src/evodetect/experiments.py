"""Parameter sweeps comparing benchmark, continuum prediction, and simulation.

A sweep walks one belief entry across a grid while everything else stays
fixed.  At each grid point it computes the centralized benchmark, the
stability classification, the integrated continuum terminal share, and a
simulated ensemble, and emits one CSV row per point plus a human-readable
summary.  The headline number is the agreement rate between the
simulated population's majority decision and the centralized benchmark,
excluding points whose discriminant sits inside a near-threshold band
where finite populations are legitimately undecided.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from .meanfield import classify_ess, integrate
from .model import GameParams, TypeProfile, centralized_decision
from .simulator import _as_seed_tuple, run_ensemble

__all__ = [
    "NEAR_THRESHOLD_BAND",
    "DEFAULT_GRID",
    "SweepSpec",
    "SweepRow",
    "run_sweep",
    "rows_to_csv",
    "emit_report",
    "load_config",
    "build_spec",
]

# |discriminant| at or below this is "near threshold": the benchmark is
# nearly indifferent there and agreement is not scored.
NEAR_THRESHOLD_BAND = 0.1

# Belief grid 0.10, 0.15, ..., 0.90.
DEFAULT_GRID = tuple(round(0.10 + 0.05 * j, 2) for j in range(17))


@dataclass(frozen=True)
class SweepSpec:
    """Complete, reproducible description of one sweep.

    ``sweep_index`` selects which belief entry the grid replaces.  The
    per-point simulation seed is derived from base_seed and the grid
    position, so rerunning any spec reproduces every row exactly.
    """

    beliefs: tuple[float, ...]
    proportions: tuple[float, ...]
    sweep_index: int
    grid: tuple[float, ...] = DEFAULT_GRID
    k: int = 20
    u: float = 0.5
    alpha: float = 0.05
    n_agents: int = 1000
    trials: int = 100
    base_seed: int = 12345
    max_steps: int = 100_000
    graph_per_trial: bool = True
    workers: int = 1
    out: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "beliefs", tuple(float(p) for p in self.beliefs))
        object.__setattr__(
            self, "proportions", tuple(float(q) for q in self.proportions)
        )
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if not (0 <= self.sweep_index < len(self.beliefs)):
            raise ValueError(
                f"sweep_index {self.sweep_index} outside 0..{len(self.beliefs) - 1}"
            )
        if not self.grid:
            raise ValueError("empty sweep grid")
        for v in self.grid:
            if not (0.0 < v < 1.0):
                raise ValueError(f"grid value {v!r} outside open interval (0, 1)")
        if self.trials <= 0:
            raise ValueError(f"trials={self.trials} must be positive")
        # fail fast on inconsistent fixed parameters
        self.params()

    def params(self) -> GameParams:
        return GameParams(
            k=self.k, u=self.u, alpha=self.alpha, n_agents=self.n_agents
        )

    def profile_at(self, value: float) -> TypeProfile:
        beliefs = list(self.beliefs)
        beliefs[self.sweep_index] = value
        return TypeProfile(tuple(beliefs), self.proportions)


@dataclass(frozen=True)
class SweepRow:
    """One grid point.

    centralized_decision / predicted_limit are None at an exact tie of
    the discriminant (rendered as 'indifferent' / 'indeterminate' in the
    CSV).  meanfield_final_x is the continuum terminal decision-0 share
    started from one half; simulated_mean_final_x averages the final
    shares of the ensemble.
    """

    swept_value: float
    discriminant: float
    centralized_decision: int | None
    predicted_limit: int | None
    meanfield_final_x: float
    simulated_mean_final_x: float
    trials: int


def run_sweep(spec: SweepSpec) -> tuple[SweepRow, ...]:
    """Evaluate every grid point; writes the CSV to spec.out when set."""
    params = spec.params()
    rows = []
    for gi, value in enumerate(spec.grid):
        profile = spec.profile_at(value)
        det = centralized_decision(profile)
        report = classify_ess(profile, params)
        traj = integrate(profile, params, x0=0.5)
        ens = run_ensemble(
            profile,
            params,
            trials=spec.trials,
            base_seed=_as_seed_tuple(spec.base_seed) + (gi,),
            max_steps=spec.max_steps,
            graph_per_trial=spec.graph_per_trial,
            workers=spec.workers,
        )
        # Both are sign readouts of the same discriminant; a mismatch
        # would mean the analysis layers disagree internally.
        if det.decision is not None and report.predicted_limit_from_half is not None:
            assert det.decision + report.predicted_limit_from_half == 1
        rows.append(
            SweepRow(
                swept_value=value,
                discriminant=det.discriminant,
                centralized_decision=det.decision,
                predicted_limit=report.predicted_limit_from_half,
                meanfield_final_x=float(traj.x_total[-1]),
                simulated_mean_final_x=ens.mean_final_x,
                trials=spec.trials,
            )
        )
    out_rows = tuple(rows)
    if spec.out:
        with open(spec.out, "w", newline="") as fh:
            fh.write(rows_to_csv(out_rows))
    return out_rows


def rows_to_csv(rows: tuple[SweepRow, ...] | list[SweepRow]) -> str:
    """Sweep rows as CSV: comma separated, '.' decimal, header, LF endings."""
    lines = [
        "swept_value,discriminant,centralized_decision,predicted_limit,"
        "meanfield_final_x,simulated_mean_final_x,trials"
    ]
    for r in rows:
        dec = "indifferent" if r.centralized_decision is None else str(r.centralized_decision)
        lim = "indeterminate" if r.predicted_limit is None else str(r.predicted_limit)
        lines.append(
            f"{r.swept_value!r},{r.discriminant!r},{dec},{lim},"
            f"{r.meanfield_final_x!r},{r.simulated_mean_final_x!r},{r.trials}"
        )
    return "\n".join(lines) + "\n"


def emit_report(rows: tuple[SweepRow, ...] | list[SweepRow]) -> tuple[str, str]:
    """(csv, summary) for a finished sweep.

    The summary scores the simulated majority decision (0 when the mean
    final decision-0 share exceeds one half, else 1) against the
    centralized benchmark over the rows with |discriminant| above
    NEAR_THRESHOLD_BAND.  Raises ValueError on an empty row set.
    """
    if not rows:
        raise ValueError("no sweep rows to report")
    csv = rows_to_csv(rows)
    scored = [
        r
        for r in rows
        if abs(r.discriminant) > NEAR_THRESHOLD_BAND
        and r.centralized_decision is not None
    ]
    agree = sum(
        1
        for r in scored
        if (0 if r.simulated_mean_final_x > 0.5 else 1) == r.centralized_decision
    )
    lines = [
        f"grid points: {len(rows)}",
        f"near-threshold points excluded (|discriminant| <= {NEAR_THRESHOLD_BAND}): "
        f"{len(rows) - len(scored)}",
    ]
    if scored:
        rate = agree / len(scored)
        lines.append(
            f"simulated vs centralized agreement: {agree}/{len(scored)} = {rate:.1%}"
        )
    else:
        lines.append("simulated vs centralized agreement: no scored points")
    return csv, "\n".join(lines) + "\n"


def load_config(path: str) -> dict:
    """Read a sweep config JSON file into a plain dict."""
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"config root must be an object, got {type(cfg).__name__}")
    return cfg


def build_spec(config: dict, overrides: dict | None = None) -> SweepSpec:
    """Merge a config dict with explicit overrides into a SweepSpec.

    Overrides win over the config; unknown keys in either raise so typos
    do not silently fall back to defaults.
    """
    merged = dict(config)
    for key, val in (overrides or {}).items():
        if val is not None:
            merged[key] = val
    known = {f.name for f in fields(SweepSpec)}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ValueError(f"unknown sweep config keys: {', '.join(unknown)}")
    for key in ("beliefs", "proportions", "grid"):
        if key in merged and merged[key] is not None:
            merged[key] = tuple(merged[key])
    return SweepSpec(**merged)
