"""Continuum dynamics and stability analysis of the decision shares.

In the large-population limit the per-type shares of decision 0 follow a
closed ODE system.  With x_i the share of type i deciding 0, x = sum_i
q_i x_i the population share, L_i = ln((1-p_i)/p_i), and N the population
size setting the time unit (one revision event per 1/N time),

    dx_i/dt = (x - x_i)/N + (alpha/N) x (x-1) B_i(x)
    B_i(x)  = 2u [(-k + 3 - 2/k) x - 1 + 1/k] + (L_i + u)(k - 1)

Averaging over types replaces L_i by the population discriminant and
closes the aggregate equation in x alone.  x = 0 and x = 1 are always
fixed points; for u > 0 and k > 2 there is one interior rest point of
the aggregate flow.  Stability reduces to a threshold test of the
discriminant against u - 2u/k, which is what ``classify_ess`` reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import TIE_TOL, GameParams, TypeProfile, discriminant

__all__ = [
    "MeanFieldState",
    "Equilibria",
    "EssReport",
    "Trajectory",
    "dxdt_type",
    "dxdt_total",
    "equilibria",
    "jacobian_entries",
    "classify_ess",
    "integrate",
]

# Fixed points at or within this of the stability threshold are flagged
# marginal rather than classified.
_STATE_TOL = 1e-12


@dataclass(frozen=True)
class MeanFieldState:
    """Per-type decision-0 shares plus their population aggregate."""

    x_per_type: tuple[float, ...]
    x_total: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "x_per_type", tuple(float(v) for v in self.x_per_type)
        )
        for v in self.x_per_type:
            if not (-_STATE_TOL <= v <= 1.0 + _STATE_TOL):
                raise ValueError(f"type share {v!r} outside [0, 1]")
        if not (-_STATE_TOL <= self.x_total <= 1.0 + _STATE_TOL):
            raise ValueError(f"total share {self.x_total!r} outside [0, 1]")

    @classmethod
    def from_shares(
        cls, profile: TypeProfile, x_per_type: tuple[float, ...] | list[float]
    ) -> "MeanFieldState":
        xs = tuple(float(v) for v in x_per_type)
        if len(xs) != profile.n_types:
            raise ValueError(
                f"{len(xs)} shares for {profile.n_types} types"
            )
        total = math.fsum(q * v for q, v in zip(profile.proportions, xs))
        return cls(x_per_type=xs, x_total=total)


def _braces(x: float, log_odds: float, params: GameParams) -> float:
    # B_i(x) from the module docstring; log_odds selects the type (or the
    # population discriminant for the aggregate equation).
    k = params.k
    u = params.u
    return 2.0 * u * ((-k + 3.0 - 2.0 / k) * x - 1.0 + 1.0 / k) + (
        log_odds + u
    ) * (k - 1.0)


def dxdt_type(
    i: int, state: MeanFieldState, profile: TypeProfile, params: GameParams
) -> float:
    """Rate of change of type i's decision-0 share at the given state."""
    n = params.n_agents
    x = state.x_total
    return (x - state.x_per_type[i]) / n + (params.alpha / n) * x * (
        x - 1.0
    ) * _braces(x, profile.log_odds(i), params)


def dxdt_total(x: float, profile: TypeProfile, params: GameParams) -> float:
    """Rate of change of the aggregate decision-0 share.

    The aggregate equation is autonomous in x: the (x - x_i)/N exchange
    terms cancel under the q_i average and only the selection term with
    the population discriminant survives.
    """
    n = params.n_agents
    return (params.alpha / n) * x * (x - 1.0) * _braces(
        x, discriminant(profile), params
    )


def jacobian_entries(
    x: float, i: int, profile: TypeProfile, params: GameParams
) -> tuple[float, float, float, float]:
    """Partial derivatives of the (x_i, x) system evaluated on the
    diagonal state x_i = x.

    Returns (d dx_i/dt / d x_i,  d dx_i/dt / d x,
             d dx/dt  / d x_i,  d dx/dt  / d x).

    The first and third entries are exact constants: the only x_i
    dependence in dx_i/dt is the -x_i/N exchange term, and the aggregate
    equation does not involve x_i at all.
    """
    n = params.n_agents
    alpha = params.alpha
    u = params.u
    k = params.k
    c3 = -k + 3.0 - 2.0 / k
    li = profile.log_odds(i)
    lam = discriminant(profile)

    d_i_i = -1.0 / n
    d_x_i = 0.0
    d_i_x = 1.0 / n + (alpha / n) * (
        (2.0 * x - 1.0) * _braces(x, li, params) + x * (x - 1.0) * 2.0 * u * c3
    )
    d_x_x = (alpha / n) * (
        (2.0 * x - 1.0) * _braces(x, lam, params) + x * (x - 1.0) * 2.0 * u * c3
    )
    return d_i_i, d_i_x, d_x_i, d_x_x


@dataclass(frozen=True)
class Equilibria:
    """Rest points of the aggregate flow.

    The boundary points 0 and 1 are always present.  ``interior`` is the
    root of B(x) when it lies inside (0, 1); it degenerates (B becomes
    constant in x) when u = 0 or k = 2, in which case ``interior`` is
    None and ``interior_degenerate`` is True.  ``interior`` is also None
    when the root exists but falls outside (0, 1).
    """

    points: tuple[float, ...]
    interior: float | None
    interior_degenerate: bool


def equilibria(profile: TypeProfile, params: GameParams) -> Equilibria:
    """All fixed points of the aggregate decision-0 dynamics."""
    lam = discriminant(profile)
    u = params.u
    k = params.k
    degenerate = u == 0.0 or k == 2
    interior = None
    if not degenerate:
        # root of B(x): x = lam / (2u (1 - 2/k)) + 1/2
        cand = lam / (2.0 * u * (1.0 - 2.0 / k)) + 0.5
        if 0.0 < cand < 1.0:
            interior = cand
    pts = (0.0, 1.0) if interior is None else (0.0, interior, 1.0)
    return Equilibria(points=pts, interior=interior, interior_degenerate=degenerate)


@dataclass(frozen=True)
class EssReport:
    """Stability verdict for the aggregate dynamics.

    ess_set                  : the asymptotically stable rest points among
                               {0, 1} (decision-0 share values, as ints)
    threshold                : u - 2u/k; |discriminant| against it decides
                               whether one or both boundary states are stable
    interior_point           : interior rest point in (0, 1), if any
    interior_degenerate      : True when u = 0 or k = 2 removes it
    predicted_limit_from_half: long-run aggregate share started from 1/2;
                               0 when the discriminant is positive, 1 when
                               negative, None (indeterminate) at a tie
    at_threshold             : |discriminant| equals the threshold, so a
                               boundary point sits exactly at marginal
                               stability and is excluded from ess_set
    """

    discriminant: float
    threshold: float
    ess_set: frozenset[int]
    interior_point: float | None
    interior_degenerate: bool
    predicted_limit_from_half: int | None
    at_threshold: bool


def classify_ess(profile: TypeProfile, params: GameParams) -> EssReport:
    """Classify the boundary rest points by the discriminant threshold test.

    x = 0 (everyone decides 1) is stable iff the discriminant exceeds
    -(u - 2u/k); x = 1 iff it is below u - 2u/k.  Strictly between the
    thresholds both are stable and the population locks into whichever
    consensus it reaches first.  Membership is computed from the sign of
    the aggregate Jacobian at the point, which is algebraically the same
    test.
    """
    lam = discriminant(profile)
    u = params.u
    k = params.k
    thr = u - 2.0 * u / k
    ess = frozenset(
        s
        for s in (0, 1)
        if jacobian_entries(float(s), 0, profile, params)[3] < 0.0
    )
    eq = equilibria(profile, params)
    if abs(lam) <= TIE_TOL:
        predicted: int | None = None
    else:
        predicted = 0 if lam > 0.0 else 1
    return EssReport(
        discriminant=lam,
        threshold=thr,
        ess_set=ess,
        interior_point=eq.interior,
        interior_degenerate=eq.interior_degenerate,
        predicted_limit_from_half=predicted,
        at_threshold=abs(abs(lam) - thr) <= _STATE_TOL,
    )


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the per-type ODE system.

    t        : (S,) sample times
    x        : (S, I) per-type decision-0 shares
    x_total  : (S,) aggregate share under the profile proportions
    """

    t: np.ndarray
    x: np.ndarray
    x_total: np.ndarray

    @property
    def terminal(self) -> tuple[float, tuple[float, ...]]:
        """(aggregate, per-type) shares at the last sample."""
        return float(self.x_total[-1]), tuple(float(v) for v in self.x[-1])

    def to_csv(self) -> str:
        """Trajectory as CSV: header t,x_total,x_1..x_I, LF line endings,
        '.' decimal separator, shortest round-trip float formatting."""
        n_types = self.x.shape[1]
        lines = ["t,x_total," + ",".join(f"x_{j + 1}" for j in range(n_types))]
        for s in range(self.t.shape[0]):
            vals = [repr(float(self.t[s])), repr(float(self.x_total[s]))]
            vals += [repr(float(v)) for v in self.x[s]]
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


def _rhs_factory(profile: TypeProfile, params: GameParams):
    q = np.asarray(profile.proportions, dtype=np.float64)
    li = np.array([profile.log_odds(j) for j in range(profile.n_types)])
    n = params.n_agents
    k = params.k
    u = params.u
    alpha = params.alpha
    c3 = -k + 3.0 - 2.0 / k

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        x = float(q @ y)
        braces = 2.0 * u * (c3 * x - 1.0 + 1.0 / k) + (li + u) * (k - 1.0)
        return (x - y) / n + (alpha / n) * x * (x - 1.0) * braces

    return rhs


def integrate(
    profile: TypeProfile,
    params: GameParams,
    x0: float | tuple[float, ...] | list[float] = 0.5,
    t_end: float | None = None,
    n_samples: int = 201,
    rtol: float = 1e-9,
    atol: float = 1e-9,
) -> Trajectory:
    """Integrate the per-type system from the given initial shares.

    x0 may be a scalar (applied to every type) or one share per type.
    With an explicit t_end the solution is sampled at n_samples evenly
    spaced times.  With t_end=None the system is integrated in spans of
    500*N time units until the motion stalls (max |dx_i/dt| <= atol/N,
    i.e. below the scale the solver resolves per unit time) or a hard
    cap of 200 spans is hit; this runs past the slow transients
    near marginal discriminants without the caller guessing a horizon.

    Adaptive explicit Runge-Kutta (RK45) with rtol = atol = 1e-9; raises
    RuntimeError with the solver's message if a step fails.
    """
    n_types = profile.n_types
    if isinstance(x0, (int, float)):
        y0 = np.full(n_types, float(x0))
    else:
        y0 = np.asarray([float(v) for v in x0], dtype=np.float64)
        if y0.shape != (n_types,):
            raise ValueError(f"x0 needs {n_types} entries, got {y0.shape[0]}")
    if np.any(y0 < 0.0) or np.any(y0 > 1.0):
        raise ValueError("initial shares must lie in [0, 1]")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")

    rhs = _rhs_factory(profile, params)
    q = np.asarray(profile.proportions, dtype=np.float64)

    if t_end is not None:
        if t_end <= 0.0:
            raise ValueError(f"t_end={t_end!r} must be positive")
        t_eval = np.linspace(0.0, float(t_end), n_samples)
        sol = solve_ivp(
            rhs, (0.0, float(t_end)), y0, method="RK45",
            t_eval=t_eval, rtol=rtol, atol=atol,
        )
        if not sol.success:
            raise RuntimeError(
                f"integration failed at t={sol.t[-1]!r}: {sol.message}"
            )
        x = sol.y.T
        return Trajectory(t=sol.t, x=x, x_total=x @ q)

    # Open horizon: chain fixed spans until the flow stalls.
    span = 500.0 * params.n_agents
    max_spans = 200
    # below atol/N per unit time the state is pinned at the solver's
    # noise floor, not moving
    stall = atol / params.n_agents
    ts = [np.array([0.0])]
    xs = [y0[None, :]]
    t0 = 0.0
    y = y0
    per_span = max(2, (n_samples - 1) // 4 + 1)
    for _ in range(max_spans):
        t_eval = np.linspace(t0, t0 + span, per_span)
        sol = solve_ivp(
            rhs, (t0, t0 + span), y, method="RK45",
            t_eval=t_eval, rtol=rtol, atol=atol,
        )
        if not sol.success:
            raise RuntimeError(
                f"integration failed at t={sol.t[-1]!r}: {sol.message}"
            )
        ts.append(sol.t[1:])
        xs.append(sol.y.T[1:])
        t0 += span
        y = sol.y[:, -1]
        if np.max(np.abs(rhs(t0, y))) <= stall:
            break
    t = np.concatenate(ts)
    x = np.vstack(xs)
    return Trajectory(t=t, x=x, x_total=x @ q)
