"""Average-delay minimization over the V2V link matrix and compression ratios.

A feasible plan selects a set of directed links subject to three constraint
families:

* link budget: at most ``num_subchannels`` links may be active in total;
* rate cap: the rate on a selected link may not exceed its sub-channel
  capacity;
* compression floor: the retained-data ratio on a selected link must satisfy
  ``ratio * exp(distance / distance_scale) >= beta`` (closer transmitters
  keep more of their data).

On top of these, the scenario demands at least ``min_ego_links`` inbound
links at the ego vehicle; without that floor the bare objective degenerates
to keeping only the single fastest link.

For a fixed link selection the delay ``ratio * volume / rate`` is increasing
in the ratio and decreasing in the rate, so the pointwise optimum is the
compression floor and the full capacity.  The solver uses that closed form
for the selected links while a penalized projected-gradient descent on the
relaxed selection variables decides which links to keep.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import Scenario, capacity_matrix
from .errors import InfeasibleError, SizeError, ValidationError

GAMMA_MIN = 0.05

ROUNDING_RULES = ("top-k-by-score",)


@dataclass(frozen=True)
class CommPlan:
    """A communication plan: link selection plus per-link rate/ratio/delay.

    ``link_matrix`` is binary with a zero diagonal.  ``compression`` entries
    all lie in (0, 1] (unselected entries are 1.0 by convention), ``rates``
    and ``delays`` are zero on unselected links.
    """

    link_matrix: np.ndarray
    compression: np.ndarray
    rates: np.ndarray
    delays: np.ndarray
    avg_delay_s: float

    @property
    def num_links(self) -> int:
        return int(self.link_matrix.sum())

    def selected_links(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.link_matrix))]


@dataclass(frozen=True)
class SolverConfig:
    learning_rate: float = 0.25
    max_iters: int = 600
    relaxation_temperature: float = 0.005
    rounding_rule: str = "top-k-by-score"
    seed: int = 0
    convergence_tol: float = 1e-9

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.relaxation_temperature <= 0:
            raise ValidationError("relaxation_temperature must be positive")
        if self.rounding_rule not in ROUNDING_RULES:
            raise ValidationError(f"rounding_rule must be one of {ROUNDING_RULES}")
        if self.convergence_tol <= 0:
            raise ValidationError("convergence_tol must be positive")


def transmission_delay(ratio: float, volume_bits: float, rate_bps: float) -> float:
    """Seconds to move ``ratio * volume_bits`` at ``rate_bps``."""
    if not (0 < ratio <= 1):
        raise ValidationError("compression ratio must lie in (0, 1]")
    if volume_bits < 0:
        raise ValidationError("data volume must be non-negative")
    if rate_bps <= 0:
        raise ValidationError("transmission rate must be positive")
    return ratio * volume_bits / rate_bps


def compression_lower_bound(distance_m: float, beta: float,
                            distance_scale_m: float,
                            floor: float = GAMMA_MIN) -> float:
    """Smallest admissible compression ratio for a link of the given length.

    The proximity-quality constraint demands ``ratio >= beta * exp(-d / scale)``;
    a positive floor keeps the result in (0, 1] even for distant pairs.
    """
    if distance_m < 0:
        raise ValidationError("distance must be non-negative")
    if not (0 < beta <= 1):
        raise ValidationError("beta must lie in (0, 1]")
    if distance_scale_m <= 0:
        raise ValidationError("distance_scale_m must be positive")
    if not (0 < floor <= 1):
        raise ValidationError("floor must lie in (0, 1]")
    return max(beta * math.exp(-distance_m / distance_scale_m), floor)


def average_delay(plan: CommPlan) -> float:
    """Total delay over selected links divided by the selected-link count."""
    count = plan.link_matrix.sum()
    if count == 0:
        raise ValidationError("plan selects no links; average delay undefined")
    return float((plan.link_matrix * plan.delays).sum() / count)


class LinkCandidate(NamedTuple):
    src: int
    dst: int
    capacity_bps: float
    distance_m: float
    ratio_floor: float
    delay_s: float  # delay at the pointwise optimum (floor ratio, full capacity)


def _candidates(scenario: Scenario) -> list[LinkCandidate]:
    caps = capacity_matrix(scenario)
    dists = scenario.distance_matrix()
    vols = scenario.data_volumes_bits
    out: list[LinkCandidate] = []
    n = len(scenario.nodes)
    for i in range(n):
        for j in range(n):
            if i == j or caps[i, j] <= 0.0:
                continue
            lb = compression_lower_bound(
                dists[i, j], scenario.beta, scenario.distance_scale_m)
            delay = lb * vols[i, j] / caps[i, j]
            out.append(LinkCandidate(i, j, caps[i, j], dists[i, j], lb, delay))
    return out


def _check_feasible(scenario: Scenario, candidates: list[LinkCandidate]) -> None:
    budget = scenario.channel.num_subchannels
    need = scenario.min_ego_links
    if need > budget:
        raise InfeasibleError(
            f"link budget violated before planning: num_subchannels={budget} "
            f"cannot host min_ego_links={need}")
    ego = scenario.ego_index
    inbound = sum(1 for c in candidates if c.dst == ego)
    if inbound < need:
        raise InfeasibleError(
            f"ego connectivity: only {inbound} positive-capacity links reach "
            f"the ego vehicle, min_ego_links={need}")


def _plan_from_selection(scenario: Scenario,
                         candidates: list[LinkCandidate],
                         selection: list[int]) -> CommPlan:
    n = len(scenario.nodes)
    link = np.zeros((n, n), dtype=int)
    ratio = np.ones((n, n))
    rates = np.zeros((n, n))
    delays = np.zeros((n, n))
    vols = scenario.data_volumes_bits
    for k in selection:
        c = candidates[k]
        link[c.src, c.dst] = 1
        ratio[c.src, c.dst] = c.ratio_floor
        rates[c.src, c.dst] = c.capacity_bps
        delays[c.src, c.dst] = ratio[c.src, c.dst] * vols[c.src, c.dst] / rates[c.src, c.dst]
    avg = float((link * delays).sum() / link.sum())
    return CommPlan(link, ratio, rates, delays, avg)


def _relaxed_descent(candidates: list[LinkCandidate], budget: int, need: int,
                     ego: int, cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Penalized projected-gradient descent on relaxed selections and ratios.

    Constraint handling, one device per family: the link budget and the ego
    floor enter as quadratic penalties on the relaxed selection variables;
    the rate cap is eliminated analytically (rates pinned at capacity, delay
    is decreasing in rate); the compression floor is enforced by projecting
    the ratios onto their feasible box after every step.
    """
    k = len(candidates)
    floors = np.array([c.ratio_floor for c in candidates])
    # delay per unit ratio, i.e. volume / capacity
    per_ratio = np.array([c.delay_s / c.ratio_floor if c.ratio_floor > 0 else 0.0
                          for c in candidates])
    # normalize so floor-ratio delays are O(1); keeps the objective gradient
    # comparable to the fixed penalty weights across instances
    floor_delays = np.array([c.delay_s for c in candidates])
    scale = floor_delays.max() if floor_delays.max() > 0 else 1.0
    per_ratio_n = per_ratio / scale

    rng = np.random.default_rng(cfg.seed)
    g = np.full(k, min(0.5, budget / (2.0 * k))) + rng.uniform(-0.01, 0.01, size=k)
    g = np.clip(g, 0.0, 1.0)
    ratios = np.ones(k)
    ego_mask = np.array([c.dst == ego for c in candidates])
    ego_count = max(int(ego_mask.sum()), 1)
    penalty = 1.0

    for _ in range(cfg.max_iters):
        total = max(g.sum(), 1e-9)
        delays_n = ratios * per_ratio_n
        mean_n = float((g * delays_n).sum() / total)

        grad_g = (delays_n - mean_n) / total
        # penalties are spread per capita; the collective correction per step
        # stays below the violation, so the dynamics contract instead of
        # flip-flopping across the constraint boundary
        over = max(0.0, g.sum() - budget)
        grad_g = grad_g + 2.0 * penalty * over / k
        short = max(0.0, need - g[ego_mask].sum())
        grad_g[ego_mask] -= 2.0 * penalty * short / ego_count
        # temperature term pushes borderline selections toward {0, 1}
        grad_g = grad_g + cfg.relaxation_temperature * (1.0 - 2.0 * g)

        grad_r = g * per_ratio_n / total

        g_new = np.clip(g - cfg.learning_rate * grad_g, 0.0, 1.0)
        ratios_new = np.clip(ratios - cfg.learning_rate * grad_r, floors, 1.0)
        step = max(np.abs(g_new - g).max(), np.abs(ratios_new - ratios).max())
        g, ratios = g_new, ratios_new
        if step < cfg.convergence_tol:
            break
    return g, ratios


def optimize(scenario: Scenario, cfg: SolverConfig | None = None) -> CommPlan:
    """Plan links and compression ratios minimizing the average delay.

    Deterministic for a fixed (scenario, config, seed).  Raises
    InfeasibleError when no selection can satisfy the link budget and the
    ego-link floor.
    """
    if cfg is None:
        cfg = SolverConfig()
    if len(scenario.nodes) < 2:
        raise InfeasibleError("planning needs at least two nodes")
    candidates = _candidates(scenario)
    _check_feasible(scenario, candidates)
    budget = scenario.channel.num_subchannels
    need = scenario.min_ego_links
    ego = scenario.ego_index

    # The descended ratios live in [floor, 1] by projection and slide toward
    # the floor on any link carrying data; the final plan pins them at the
    # floor, the closed-form optimum.
    scores, _ = _relaxed_descent(candidates, budget, need, ego, cfg)

    # top-k-by-score rounding: grow the score-ordered prefix (ego links first
    # until the floor is met) and keep the prefix size with the lowest exact
    # average.  Degenerate instances can leave the relaxed scores tied or
    # mid-range, so the same prefix search is repeated on the analytic
    # delay ordering as a cross-check and the better plan wins; ties go to
    # the descent's choice.
    score_order = sorted(range(len(candidates)),
                         key=lambda k: (-scores[k], candidates[k].delay_s,
                                        candidates[k].src, candidates[k].dst))
    delay_order = sorted(range(len(candidates)),
                         key=lambda k: (candidates[k].delay_s,
                                        candidates[k].src, candidates[k].dst))
    sel_score, avg_score = _best_prefix(candidates, score_order, budget, need, ego)
    sel_delay, avg_delay = _best_prefix(candidates, delay_order, budget, need, ego)
    best_sel = sel_score if avg_score <= avg_delay else sel_delay
    return _plan_from_selection(scenario, candidates, best_sel)


def _best_prefix(candidates: list[LinkCandidate], order: list[int],
                 budget: int, need: int, ego: int) -> tuple[list[int], float]:
    """Best selection among prefixes of ``order`` with the ego floor enforced."""
    ego_ordered = [k for k in order if candidates[k].dst == ego]
    forced = ego_ordered[:need]
    forced_set = set(forced)
    rest = [k for k in order if k not in forced_set]
    best_sel: list[int] | None = None
    best_avg = math.inf
    for extra in range(0, budget - need + 1):
        if extra > len(rest):
            break
        sel = forced + rest[:extra]
        avg = sum(candidates[k].delay_s for k in sel) / len(sel)
        if avg < best_avg:
            best_sel, best_avg = sel, avg
    assert best_sel is not None
    return best_sel, best_avg


def exhaustive_optimum(scenario: Scenario) -> CommPlan:
    """Enumerate every feasible link selection and return the global optimum.

    Verification oracle for :func:`optimize`; refuses instances with more
    than 20 candidate links.
    """
    if len(scenario.nodes) < 2:
        raise InfeasibleError("planning needs at least two nodes")
    candidates = _candidates(scenario)
    _check_feasible(scenario, candidates)
    if len(candidates) > 20:
        raise SizeError(
            f"{len(candidates)} candidate links exceed the enumeration cap of 20")
    budget = scenario.channel.num_subchannels
    need = scenario.min_ego_links
    ego = scenario.ego_index

    best_sel: tuple[int, ...] | None = None
    best_avg = math.inf
    max_size = min(budget, len(candidates))
    for size in range(max(1, need), max_size + 1):
        for combo in itertools.combinations(range(len(candidates)), size):
            if sum(1 for k in combo if candidates[k].dst == ego) < need:
                continue
            avg = sum(candidates[k].delay_s for k in combo) / size
            if avg < best_avg:
                best_sel, best_avg = combo, avg
    if best_sel is None:
        raise InfeasibleError("no feasible link selection exists")
    return _plan_from_selection(scenario, candidates, list(best_sel))


def validate_plan(plan: CommPlan, scenario: Scenario,
                  rel_tol: float = 1e-9) -> list[str]:
    """Independently re-derive every constraint and report violations.

    Capacities, distances and ratio floors are recomputed from the scenario
    rather than trusted from the plan.  Returns a list of human-readable
    violation strings; an empty list means the plan is valid.  ``rel_tol``
    absorbs float round-off in the exponential bound and the rate cap.
    """
    issues: list[str] = []
    n = len(scenario.nodes)
    g = plan.link_matrix
    if g.shape != (n, n):
        return [f"link matrix shape {g.shape} does not match scenario size {n}"]
    if np.any(np.diag(g) != 0):
        issues.append("link matrix diagonal must be zero")
    if not np.all(np.isin(g, (0, 1))):
        issues.append("link matrix entries must be binary")
    if np.any(plan.compression <= 0) or np.any(plan.compression > 1):
        issues.append("compression entries must lie in (0, 1]")

    budget = scenario.channel.num_subchannels
    if g.sum() > budget:
        issues.append(f"link budget violated: {int(g.sum())} links > {budget} sub-channels")
    ego = scenario.ego_index
    if g[:, ego].sum() < scenario.min_ego_links:
        issues.append(
            f"ego floor violated: {int(g[:, ego].sum())} inbound links < "
            f"{scenario.min_ego_links} required")

    caps = capacity_matrix(scenario)
    dists = scenario.distance_matrix()
    vols = scenario.data_volumes_bits
    for i, j in zip(*np.nonzero(g)):
        rate = plan.rates[i, j]
        ratio = plan.compression[i, j]
        if rate <= 0:
            issues.append(f"link ({i},{j}): rate must be positive on a selected link")
            continue
        if rate > caps[i, j] * (1 + rel_tol):
            issues.append(
                f"link ({i},{j}): rate {rate:.6g} exceeds capacity {caps[i, j]:.6g}")
        bound = ratio * math.exp(dists[i, j] / scenario.distance_scale_m)
        if bound < scenario.beta * (1 - rel_tol):
            issues.append(
                f"link ({i},{j}): compression floor violated "
                f"({bound:.12g} < beta={scenario.beta:.12g})")
        expected = ratio * vols[i, j] / rate
        if plan.delays[i, j] != expected:
            issues.append(
                f"link ({i},{j}): delay {plan.delays[i, j]!r} != ratio*volume/rate {expected!r}")
    try:
        recomputed = average_delay(plan)
    except ValidationError:
        issues.append("plan selects no links")
    else:
        if not math.isclose(plan.avg_delay_s, recomputed, rel_tol=1e-12, abs_tol=1e-15):
            issues.append(
                f"stored average delay {plan.avg_delay_s!r} != recomputed {recomputed!r}")
    return issues
