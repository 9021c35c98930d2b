"""Synchronous round loop, trials and campaigns.

Every round reads one snapshot of positions; all agents decide from it and
move together (Jacobi update). Two implementations of a round exist:
:func:`decide` works on whole-swarm matrices and drives the simulator,
:func:`run_round_per_agent` runs each agent separately through the per-agent
protocol functions using only its own inbox, and is used to cross-check the
first.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import assignment as asg
from . import motion, protocol
from .core import AgentState, CoverageMark, TargetSet, WorldConfig, coverage_matrix, pairwise_distances
from .protocol import LLOYD, PROPOSED, CoverageReport, Tier
from .scenarios import FixedDuration, OnFullCoverage, Scenario


@dataclass
class SwarmState:
    """All agents at one instant. Row ``i`` of every array belongs to agent ``i``."""

    t: float
    positions: np.ndarray
    memory: np.ndarray
    references: np.ndarray
    tiers: np.ndarray

    @classmethod
    def initial(cls, positions, n_targets: int, t: float = 0.0) -> "SwarmState":
        p = np.array(positions, dtype=float).reshape(-1, 2)
        n = len(p)
        return cls(t, p, np.full((n, n_targets), CoverageMark.NULL, dtype=np.int8),
                   np.full(n, -1, dtype=np.int64), np.full(n, Tier.HOLD, dtype=np.int8))

    def agents(self) -> list[AgentState]:
        return [AgentState(i, self.positions[i].copy(), self.memory[i].copy(),
                           None if self.references[i] < 0 else int(self.references[i]))
                for i in range(len(self.positions))]

    def reset_memory(self, n_targets: int) -> "SwarmState":
        return SwarmState.initial(self.positions, n_targets, self.t)


@dataclass(frozen=True)
class MetricsRecord:
    t: float
    p_cov: float
    p_cov_lower: float
    min_pairwise_distance: float


@dataclass
class RoundSnapshot:
    """What agents may read in one round: positions and per-agent inboxes.

    ``inboxes[i]`` only holds reports from agents within ``d_c`` of agent i.
    """

    t: float
    positions: np.ndarray
    inboxes: list[list[CoverageReport]]


@dataclass
class Decision:
    """Outcome of the sensing/communication half of a round."""

    t: float
    neighbors: np.ndarray
    assigned: np.ndarray
    memory: np.ndarray
    references: np.ndarray
    tiers: np.ndarray
    metrics: MetricsRecord


def min_pairwise_distance(agent_dist: np.ndarray) -> float:
    n = agent_dist.shape[0]
    if n < 2:
        return math.inf
    return float(agent_dist[np.triu_indices(n, k=1)].min())


def decide(state: SwarmState, targets: TargetSet, config: WorldConfig, algorithm: str) -> Decision:
    mu = targets.positions
    agent_dist = pairwise_distances(state.positions, state.positions)
    target_dist = pairwise_distances(state.positions, mu)
    nb = asg.neighbor_matrix(agent_dist, config.d_c)
    assigned = asg.assignment_matrix(target_dist, nb)
    covered_by = coverage_matrix(state.positions, mu, config.footprint)
    reports = protocol.report_matrix(nb, covered_by)
    memory = protocol.update_memory_matrix(state.memory, nb, assigned, reports)
    refs, tiers = protocol.select_references(assigned, memory, target_dist, algorithm)
    p, p_low = protocol.coverage_rates(covered_by, assigned)
    rec = MetricsRecord(state.t, float(p), float(p_low), min_pairwise_distance(agent_dist))
    return Decision(state.t, nb, assigned, memory, refs, tiers, rec)


def move(state: SwarmState, decision: Decision, targets: TargetSet, config: WorldConfig) -> tuple[SwarmState, np.ndarray]:
    """Apply a decision. Returns the committed state and the applied velocities."""
    x = state.positions
    holding = decision.references < 0
    ref_pts = targets.positions[np.where(holding, 0, decision.references)]
    u = motion.attraction_all(x, ref_pts, holding, config.k_gain)
    du = motion.repulsion_all(x, pairwise_distances(x, x), decision.assigned.any(axis=1),
                              config.K_d, config.K_s, config.d_k)
    new_x, v = motion.integrate_all(x, u, du, config.dt, config.v_max, config.region)
    return SwarmState(state.t + config.dt, new_x, decision.memory, decision.references, decision.tiers), v


def run_round(state: SwarmState, targets: TargetSet, config: WorldConfig,
              algorithm: str) -> tuple[SwarmState, MetricsRecord]:
    """One synchronous round. The metrics describe the snapshot the round acted on."""
    d = decide(state, targets, config, algorithm)
    new_state, _ = move(state, d, targets, config)
    return new_state, d.metrics


def build_snapshot(state: SwarmState, targets: TargetSet, config: WorldConfig) -> RoundSnapshot:
    """Exchange step of a round, carried out agent by agent."""
    x = state.positions
    n = len(x)
    nsets = [asg.neighbor_set(i, x, config.d_c) for i in range(n)]
    outgoing = []
    for i in range(n):
        own = asg.assign_targets(i, x, targets, nsets[i])
        known = {j: x[j] for j in nsets[i].members}
        outgoing.append(protocol.evaluate_coverage(i, own, known, targets, config.footprint))
    inboxes = [[outgoing[j] for j in nsets[i].members] for i in range(n)]
    return RoundSnapshot(state.t, x.copy(), inboxes)


def decide_agent(i: int, snapshot: RoundSnapshot, memory: np.ndarray, targets: TargetSet,
                 config: WorldConfig, algorithm: str) -> tuple[protocol.ReferenceChoice, bool, np.ndarray]:
    """Agent ``i``'s decision from its own inbox and memory only.

    Neighbour positions are the senders of the inbox, so nothing outside the
    agent's neighbourhood is read. Returns ``(choice, owns_targets, memory)``.
    """
    senders = sorted(r.sender for r in snapshot.inboxes[i])
    local = {j: snapshot.positions[j] for j in senders}
    x = local[i]
    order = list(local)
    pos = np.array([local[j] for j in order])
    me = order.index(i)
    own = asg.assign_targets(me, pos, targets, asg.NeighborSet(me, tuple(range(len(order)))))
    own = asg.AssignedTargets(i, own.targets)
    new_mem = protocol.update_memory(memory, snapshot.inboxes[i])
    if algorithm == PROPOSED:
        V, W = protocol.uncovered_sets(new_mem)
        choice = protocol.select_reference_proposed(own, V, W, targets, x)
    elif algorithm == LLOYD:
        choice = protocol.select_reference_lloyd(own, targets, x)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return choice, bool(own.targets), new_mem


def run_round_per_agent(state: SwarmState, targets: TargetSet, config: WorldConfig, algorithm: str,
                        order: Optional[Sequence[int]] = None) -> SwarmState:
    """Reference round built from the per-agent functions, visiting agents in ``order``."""
    n = len(state.positions)
    snap = build_snapshot(state, targets, config)
    order = range(n) if order is None else order
    choices, owns, mems = {}, {}, {}
    for i in order:
        choices[i], owns[i], mems[i] = decide_agent(i, snap, state.memory[i], targets, config, algorithm)
    pos_map = {j: snap.positions[j] for j in range(n)}
    new_x = np.empty_like(state.positions)
    for i in order:
        c = choices[i]
        ref = None if c.target is None else targets.positions[c.target]
        u = motion.attraction(snap.positions[i], ref, config.k_gain)
        du = motion.repulsion(i, pos_map, owns[i], config.K_d, config.K_s, config.d_k)
        new_x[i] = motion.integrate(snap.positions[i], u, du, config.dt, config.v_max, config.region)
    return SwarmState(state.t + config.dt, new_x, np.array([mems[i] for i in range(n)], dtype=np.int8),
                      np.array([-1 if choices[i].target is None else choices[i].target for i in range(n)]),
                      np.array([choices[i].tier for i in range(n)], dtype=np.int8))


# -- trials -----------------------------------------------------------------

@dataclass
class PhaseResult:
    index: int
    start_t: float
    end_t: float
    final_p_cov: float
    converged: bool
    convergence_time: Optional[float]


@dataclass
class TrialResult:
    seed: int
    algorithm: str
    t: np.ndarray
    p_cov: np.ndarray
    p_cov_lower: np.ndarray
    min_distance: np.ndarray
    positions: np.ndarray      # (steps, n, 2)
    references: np.ndarray     # (steps, n); -1 while holding
    tiers: np.ndarray          # (steps, n)
    max_speed: float
    phases: list[PhaseResult] = field(default_factory=list)
    failure: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.failure is not None

    @property
    def converged(self) -> bool:
        return not self.failed and bool(self.phases) and all(p.converged for p in self.phases)

    @property
    def convergence_time(self) -> Optional[float]:
        return self.phases[-1].convergence_time if self.converged else None

    @property
    def global_min_distance(self) -> float:
        return float(self.min_distance.min())

    def safe_fraction(self, threshold: float) -> float:
        return float(np.mean(self.min_distance >= threshold))

    @property
    def records(self) -> list[MetricsRecord]:
        return [MetricsRecord(*row) for row in zip(self.t.tolist(), self.p_cov.tolist(),
                                                   self.p_cov_lower.tolist(), self.min_distance.tolist())]


def _phase_convergence(p_cov: list[float], times: list[float]) -> Optional[float]:
    if not p_cov or p_cov[-1] != 1.0:
        return None
    k = len(p_cov) - 1
    while k > 0 and p_cov[k - 1] == 1.0:
        k -= 1
    return times[k]


def run_trial(scenario: Scenario, algorithm: str, seed: int) -> TrialResult:
    """Run every phase of ``scenario``; per-seed parts are drawn from ``seed``."""
    if algorithm not in protocol.ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    sc = scenario.realize(seed)
    cfg = sc.config
    n_t = cfg.n_targets
    trigger = sc.phase_trigger
    if isinstance(trigger, FixedDuration):
        max_steps = int(round(trigger.seconds / cfg.dt))
        settle_steps = None
    else:
        max_steps = cfg.n_steps
        settle_steps = int(round(trigger.settle / cfg.dt))

    rows_t, rows_p, rows_pl, rows_md = [], [], [], []
    traj, refs, tiers = [], [], []
    phases: list[PhaseResult] = []
    failure = None
    max_speed = 0.0
    step = 0
    state = SwarmState.initial(sc.initial_agent_positions, n_t)
    last_phase = len(sc.target_phases) - 1

    for k, targets in enumerate(sc.target_phases):
        state = state.reset_memory(n_t)
        start = step
        phase_p, phase_t = [], []
        full_run = 0
        while True:
            state.t = step * cfg.dt
            d = decide(state, targets, cfg, algorithm)
            m = d.metrics
            phase_p.append(m.p_cov)
            phase_t.append(m.t)
            full_run = full_run + 1 if m.p_cov == 1.0 else 0
            done = step - start >= max_steps
            if settle_steps is not None and full_run > settle_steps:
                done = True
            if done and k < last_phase:
                # the boundary instant is recorded against the next phase
                break
            rows_t.append(m.t)
            rows_p.append(m.p_cov)
            rows_pl.append(m.p_cov_lower)
            rows_md.append(m.min_pairwise_distance)
            traj.append(state.positions.copy())
            refs.append(d.references.copy())
            tiers.append(d.tiers.copy())
            if done:
                break
            state, v = move(state, d, targets, cfg)
            step += 1
            if not np.all(np.isfinite(state.positions)):
                bad = np.flatnonzero(~np.all(np.isfinite(state.positions), axis=1))
                failure = f"non-finite position at t={step * cfg.dt:.6g} s, phase {k}, agents {bad.tolist()}"
                break
            max_speed = max(max_speed, float(np.sqrt((v * v).sum(axis=1)).max()))
        phases.append(PhaseResult(k, phase_t[0], phase_t[-1], phase_p[-1], phase_p[-1] == 1.0,
                                  _phase_convergence(phase_p, phase_t)))
        if failure:
            break

    n = cfg.n_agents
    return TrialResult(
        seed=seed, algorithm=algorithm, t=np.array(rows_t), p_cov=np.array(rows_p),
        p_cov_lower=np.array(rows_pl), min_distance=np.array(rows_md),
        positions=np.array(traj).reshape(-1, n, 2), references=np.array(refs).reshape(-1, n),
        tiers=np.array(tiers).reshape(-1, n), max_speed=max_speed, phases=phases, failure=failure)


# -- campaigns --------------------------------------------------------------

@dataclass
class CampaignResult:
    scenario: Scenario
    algorithm: str
    base_seed: int
    trials: list[TrialResult]

    @property
    def seeds(self) -> list[int]:
        return [t.seed for t in self.trials]

    def summary(self) -> dict:
        trials = self.trials
        thr = self.scenario.config.collision_distance
        md = np.concatenate([t.min_distance for t in trials]) if trials else np.array([])
        conv = [t.convergence_time for t in trials]
        times = np.array([c for c in conv if c is not None])
        return {
            "algorithm": self.algorithm,
            "n_trials": len(trials),
            "seeds": self.seeds,
            "n_failed": sum(t.failed for t in trials),
            "failures": {str(t.seed): t.failure for t in trials if t.failed},
            "fraction_converged": sum(t.converged for t in trials) / len(trials),
            "convergence_times": conv,
            "convergence_time_quantiles": (dict(zip(["min", "p25", "median", "p75", "max"],
                                                    np.quantile(times, [0, .25, .5, .75, 1]).tolist()))
                                           if times.size else None),
            "final_p_cov": [float(t.p_cov[-1]) for t in trials],
            "global_min_distance": [t.global_min_distance for t in trials],
            "safe_fraction_per_trial": [t.safe_fraction(thr) for t in trials],
            "safe_fraction": float(np.mean(md >= thr)) if md.size else 1.0,
            "collision_distance": thr,
            "max_applied_speed": max((t.max_speed for t in trials), default=0.0),
            "phases_per_trial": [len(t.phases) for t in trials],
        }


def _trial_job(args):
    return run_trial(*args)


def run_campaign(scenario: Scenario, algorithm: str, n_trials: int, base_seed: int = 0,
                 workers: int = 1) -> CampaignResult:
    """Independent trials with seeds ``base_seed .. base_seed + n_trials - 1``.

    ``workers > 1`` spreads trials over processes; results are identical.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    jobs = [(scenario, algorithm, base_seed + k) for k in range(n_trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            trials = list(ex.map(_trial_job, jobs))
    else:
        trials = [_trial_job(j) for j in jobs]
    return CampaignResult(scenario, algorithm, base_seed, trials)
