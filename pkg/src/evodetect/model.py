"""Closed-form primitives of the social-learning detection game.

A population of agents must collectively decide which of two world states
holds.  Each agent belongs to a type with a fixed private belief
``p = Pr(state 1)`` and repeatedly revises a binary decision by a
death-birth update on a k-regular interaction graph: a uniformly chosen
agent replaces its decision with a neighbor's, sampled proportionally to
the neighbors' decision fitness.

This module holds the population profile and game constants, the
centralized log-belief benchmark, the decision fitness functions, and the
per-update switch probabilities (exact lottery and its first-order
expansion in the selection strength).  Everything here is closed form;
stochastic and dynamical layers build on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "TIE_TOL",
    "PROPORTION_TOL",
    "TypeProfile",
    "GameParams",
    "DetectorResult",
    "discriminant",
    "centralized_decision",
    "fitness0",
    "fitness1",
    "transition_prob_exact",
    "transition_prob_first_order",
    "expected_transition",
    "binomial_pmf",
]

# |discriminant| at or below this counts as an exact tie for the benchmark.
TIE_TOL = 1e-12

# Allowed slack in sum(proportions) == 1.
PROPORTION_TOL = 1e-12


@dataclass(frozen=True)
class TypeProfile:
    """Population composition: per-type beliefs and proportions.

    ``beliefs[i]`` is type i's private probability that the true state
    is 0; ``proportions[i]`` is the fraction of the population of that
    type.  Beliefs must lie strictly inside (0, 1) so the log-odds are
    finite; proportions must be nonnegative and sum to 1.
    """

    beliefs: tuple[float, ...]
    proportions: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "beliefs", tuple(float(p) for p in self.beliefs))
        object.__setattr__(
            self, "proportions", tuple(float(q) for q in self.proportions)
        )
        if len(self.beliefs) == 0:
            raise ValueError("profile needs at least one type")
        if len(self.beliefs) != len(self.proportions):
            raise ValueError(
                f"{len(self.beliefs)} beliefs vs {len(self.proportions)} proportions"
            )
        for p in self.beliefs:
            if not (0.0 < p < 1.0) or math.isnan(p):
                raise ValueError(f"belief {p!r} outside open interval (0, 1)")
        for q in self.proportions:
            if q < 0.0 or math.isnan(q):
                raise ValueError(f"proportion {q!r} negative")
        total = math.fsum(self.proportions)
        if abs(total - 1.0) > PROPORTION_TOL:
            raise ValueError(f"proportions sum to {total!r}, expected 1")

    @property
    def n_types(self) -> int:
        return len(self.beliefs)

    def log_odds(self, i: int) -> float:
        """ln((1 - p_i) / p_i): type i's log-likelihood leaning toward
        state 1 (positive when the type considers state 0 unlikely)."""
        p = self.beliefs[i]
        return math.log((1.0 - p) / p)


@dataclass(frozen=True)
class GameParams:
    """Game constants shared by every layer.

    k        : interaction-graph degree, >= 2
    u        : payoff bonus for matching a neighbor's decision, >= 0
    alpha    : selection strength in (0, 1); payoffs enter fitness as
               1 - alpha + alpha * payoff
    n_agents : population size; must satisfy n_agents >= k + 1 and
               n_agents * k even so a k-regular graph exists
    """

    k: int = 20
    u: float = 0.5
    alpha: float = 0.05
    n_agents: int = 1000

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 2:
            raise ValueError(f"degree k={self.k!r} must be an integer >= 2")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "alpha", float(self.alpha))
        if not (self.u >= 0.0):
            raise ValueError(f"conformity bonus u={self.u!r} must be >= 0")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"selection strength alpha={self.alpha!r} outside (0, 1)")
        if int(self.n_agents) != self.n_agents:
            raise ValueError(f"n_agents={self.n_agents!r} must be an integer")
        object.__setattr__(self, "n_agents", int(self.n_agents))
        if self.n_agents < self.k + 1:
            raise ValueError(
                f"n_agents={self.n_agents} too small for degree k={self.k}"
            )
        if (self.n_agents * self.k) % 2 != 0:
            raise ValueError(
                f"n_agents*k = {self.n_agents * self.k} is odd; no regular graph exists"
            )


@dataclass(frozen=True)
class DetectorResult:
    """Outcome of the centralized benchmark.

    ``decision`` is 0 or 1, or None when the discriminant ties to within
    TIE_TOL (then ``indifferent`` is True and either decision is optimal).
    """

    discriminant: float
    decision: int | None
    indifferent: bool


def discriminant(profile: TypeProfile) -> float:
    """Population log-belief discriminant sum_i q_i * ln((1-p_i)/p_i).

    Positive means the pooled beliefs favor state 1, negative state 0.
    Uses compensated summation so ties of symmetric profiles come out
    exactly zero.
    """
    return math.fsum(
        q * math.log((1.0 - p) / p)
        for p, q in zip(profile.beliefs, profile.proportions)
    )


def centralized_decision(profile: TypeProfile) -> DetectorResult:
    """Benchmark decision of a center that pools all private beliefs.

    Declares state 1 when the discriminant is positive, state 0 when
    negative, and indifference when |discriminant| <= TIE_TOL.
    """
    lam = discriminant(profile)
    if abs(lam) <= TIE_TOL:
        return DetectorResult(discriminant=lam, decision=None, indifferent=True)
    return DetectorResult(discriminant=lam, decision=1 if lam > 0.0 else 0, indifferent=False)


def _check_neighborhood(k0: int, params: GameParams) -> None:
    if int(k0) != k0 or not (0 <= k0 <= params.k):
        raise ValueError(f"neighbor decision count k0={k0!r} outside 0..{params.k}")


def fitness0(i: int, k0: int, profile: TypeProfile, params: GameParams) -> float:
    """Fitness of a type-i agent currently deciding 0, with k0 of its k
    neighbors deciding 0.

    Per neighbor the decision pays the surprisal the agent assigns to the
    state it bets against, -ln(1-p_i); the k0 agreeing neighbors add the
    conformity bonus u on top.  Total payoff -k ln(1-p_i) + k0 u enters
    fitness through the selection knob:

        1 - alpha + alpha * (-k ln(1-p_i) + k0 u)
    """
    _check_neighborhood(k0, params)
    p = profile.beliefs[i]
    payoff = -params.k * math.log(1.0 - p) + k0 * params.u
    return 1.0 - params.alpha + params.alpha * payoff


def fitness1(i: int, k0: int, profile: TypeProfile, params: GameParams) -> float:
    """Fitness of a type-i agent deciding 1 in the same neighborhood.

    Mirror of ``fitness0``: deciding 1 pays the surprisal of state 0,
    -ln(p_i), per neighbor, and the k - k0 neighbors who also decide 1
    add the conformity bonus u:

        1 - alpha + alpha * (-k ln(p_i) + (k - k0) u)
    """
    _check_neighborhood(k0, params)
    p = profile.beliefs[i]
    payoff = -params.k * math.log(p) + (params.k - k0) * params.u
    return 1.0 - params.alpha + params.alpha * payoff


def transition_prob_exact(
    i: int, k0: int, profile: TypeProfile, params: GameParams
) -> float:
    """Probability that a revising type-i agent adopts decision 1 when k0
    of its k neighbors decide 0.

    This is the exact death-birth lottery the simulator runs: the agent
    copies a neighbor with probability proportional to that neighbor's
    fitness for its own current decision, so

        Pr(adopt 1) = (k-k0) f1 / (k0 f0 + (k-k0) f1)

    with f0 = fitness0(i, k0, ...) and f1 = fitness1(i, k0, ...).
    Fitness is positive for alpha in (0, 1), so the denominator never
    vanishes.  Boundary neighborhoods are absorbing: k0 = k gives 0 and
    k0 = 0 gives 1.
    """
    _check_neighborhood(k0, params)
    f0 = fitness0(i, k0, profile, params)
    f1 = fitness1(i, k0, profile, params)
    w1 = (params.k - k0) * f1
    return w1 / (k0 * f0 + w1)


def transition_prob_first_order(
    i: int, k0: int, profile: TypeProfile, params: GameParams
) -> float:
    """First-order expansion of ``transition_prob_exact`` in alpha.

    Writing L_i = ln((1-p_i)/p_i) and x0 = k0/k for the local share of
    decision 0,

        Pr(adopt 1) ~= 1 - x0 + alpha (k - k0) [ (L_i + u) x0 - 2 u x0^2 ]

    The truncation error is O(alpha^2), which the tests exercise by
    halving alpha and checking the error shrinks fourfold.  Unlike the
    exact lottery this expansion can leave [0, 1] for large alpha; it is
    kept as the analytic bridge to the continuum dynamics, not as a
    sampling rule.
    """
    _check_neighborhood(k0, params)
    k = params.k
    li = profile.log_odds(i)
    x0 = k0 / k
    correction = (li + params.u) * x0 - 2.0 * params.u * x0 * x0
    return (k - k0) / k + params.alpha * (k - k0) * correction


def binomial_pmf(k: int, k0: int, x: float) -> float:
    """Binomial(k, x) probability of exactly k0 successes.

    Used to average neighborhood-dependent quantities under well-mixed
    neighbor decisions; exposed so the moment identity between the
    per-neighborhood and averaged transition rules is testable directly.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"k={k!r} must be a nonnegative integer")
    if int(k0) != k0 or not (0 <= k0 <= k):
        raise ValueError(f"k0={k0!r} outside 0..{k}")
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"success probability x={x!r} outside [0, 1]")
    return math.comb(k, k0) * x**k0 * (1.0 - x) ** (k - k0)


def expected_transition(i: int, x: float, profile: TypeProfile, params: GameParams) -> float:
    """Expected first-order adopt-1 probability for a type-i agent whose k
    neighbors each independently decide 0 with probability x.

    Closed form of sum_k0 Binomial(k, x)(k0) * transition_prob_first_order(i, k0):

        1 - x + alpha (L_i + u) (k-1) (x - x^2)
              - 2 u alpha [ (-k + 3 - 2/k) x^3 + (k - 4 + 3/k) x^2 + (1 - 1/k) x ]

    The identity with the explicit binomial average is exact in exact
    arithmetic; tests pin it to 1e-12.
    """
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"neighbor decision share x={x!r} outside [0, 1]")
    k = params.k
    u = params.u
    alpha = params.alpha
    li = profile.log_odds(i)
    cubic = (
        (-k + 3.0 - 2.0 / k) * x**3
        + (k - 4.0 + 3.0 / k) * x**2
        + (1.0 - 1.0 / k) * x
    )
    return 1.0 - x + alpha * (li + u) * (k - 1.0) * (x - x * x) - 2.0 * u * alpha * cubic
