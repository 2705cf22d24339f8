"""Round-robin simulation of receiver-side load adjustment.

Each receiver knows only its own measured power, its own bounds and demand,
and one feedback bit per other receiver (1 when that receiver's demand is
currently met).  On its turn a receiver probes its power at ``x_n - dx``,
``x_n``, ``x_n + dx`` to learn which side of its own power peak it sits on,
then applies one of five update rules:

  C1  hungry, below its peak            -> raise x_n by dx (helps itself)
  C2  hungry, above its peak            -> lower x_n by dx (helps itself)
  C3  fed, off-peak, someone hungry     -> raise x_n by dx (helps others)
  C4  fed, off-peak, everyone fed       -> lower x_n by dx (cuts transmit power)
  C5  otherwise                         -> no change

Updates clamp to [x_min, x_max]; probe evaluations themselves are
hypothetical measurements and may leave the bounds (only staying positive).
A run terminates after ``k_max`` agent steps, or earlier once N consecutive
steps take C5 (one full silent round).

Implementation note: the power expressions in the step engine mirror
``circuit.solve_closed_form`` operation for operation, so simulated
measurements, recorded traces, and replay verification all agree to the
bit.  The engine body is container-agnostic (plain lists or float64
arrays), which lets ``batch_run`` execute it under numba when available and
fall back to interpreted Python otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import (
    PowerReport,
    ScenarioError,
    SystemScenario,
    as_loads,
    coupling_ohms2,
    solve_closed_form,
)

__all__ = [
    "Case",
    "PeakPosition",
    "AgentState",
    "agent_states",
    "ProtocolConfig",
    "StepRecord",
    "ProtocolTrace",
    "TrialResult",
    "BatchSummary",
    "NoFeasibleTrialsError",
    "draw_initial_loads",
    "classify_position",
    "decide_case",
    "agent_step",
    "run_protocol",
    "batch_run",
    "verify_trace",
]


class Case(enum.IntEnum):
    """Update rule taken by the active receiver at one step."""

    C1 = 1
    C2 = 2
    C3 = 3
    C4 = 4
    C5 = 5


class PeakPosition(enum.Enum):
    """Side of its own power peak a receiver's probe pattern indicates."""

    BELOW_PEAK = "below-peak"
    AT_PEAK = "at-peak"
    ABOVE_PEAK = "above-peak"


class NoFeasibleTrialsError(RuntimeError):
    """Every trial of a batch ended with some demand unmet."""


@dataclass(frozen=True)
class AgentState:
    """One receiver's local view: its index, current load, and feedback bit.

    ``fb`` is 1 exactly when the receiver's delivered power currently meets
    its demand; it is the only information the receiver shares.
    """

    n: int
    x: float
    fb: int

    def __post_init__(self) -> None:
        if not self.x > 0:
            raise ScenarioError(f"x must be > 0 (got {self.x})")
        if self.fb not in (0, 1):
            raise ScenarioError(f"fb must be 0 or 1 (got {self.fb})")


def agent_states(scenario: SystemScenario, loads) -> tuple[AgentState, ...]:
    """Current per-receiver states (loads plus truthful feedback bits)."""
    xs = as_loads(scenario, loads)
    report = solve_closed_form(scenario, xs)
    return tuple(
        AgentState(n=k, x=xs[k], fb=1 if report.p[k] >= rec.p_min else 0)
        for k, rec in enumerate(scenario.receivers)
    )


@dataclass(frozen=True)
class ProtocolConfig:
    """Step size, iteration budget, and initial-load seed for one run."""

    dx: float = 1e-3
    k_max: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.dx > 0:
            raise ScenarioError(f"dx must be > 0 (got {self.dx})")
        if not self.k_max >= 1:
            raise ScenarioError(f"k_max must be >= 1 (got {self.k_max})")


@dataclass(frozen=True, slots=True)
class StepRecord:
    """One agent step: what the receiver saw and what it did.

    ``feedback`` is the full N-bit vector sampled at the start of the step
    (the active receiver consumes the other N-1 bits).  ``probes`` holds the
    measured power at ``x_n - dx``, ``x_n``, ``x_n + dx``.  ``report`` is the
    full power report after the update was applied.
    """

    iteration: int
    agent: int
    feedback: tuple[int, ...]
    probes: tuple[float, float, float]
    case: Case
    x_new: float
    report: PowerReport


@dataclass(frozen=True)
class ProtocolTrace:
    """Complete record of one protocol run."""

    config: ProtocolConfig
    initial: tuple[float, ...]
    records: tuple[StepRecord, ...]
    iterations: int
    converged: bool
    feasible: bool
    final: tuple[float, ...]
    final_report: PowerReport


@dataclass(frozen=True)
class TrialResult:
    """Terminal outcome of one batch trial."""

    seed: int
    converged: bool
    feasible: bool
    iterations: int
    p_tx: float
    final: tuple[float, ...]


@dataclass(frozen=True)
class BatchSummary:
    """Aggregate over a batch of independently seeded runs."""

    trials: int
    n_feasible: int
    n_infeasible: int
    n_converged: int
    mean_ptx_feasible: float
    results: tuple[TrialResult, ...]


def draw_initial_loads(scenario: SystemScenario, seed: int) -> tuple[float, ...]:
    """Initial loads, uniform over each receiver's [x_min, x_max] (PCG64 stream)."""
    rng = np.random.default_rng(seed)
    return tuple(float(rng.uniform(rec.x_min, rec.x_max)) for rec in scenario.receivers)


def _probe_lo(x: float, dx: float) -> float:
    """Lower probe point, kept strictly positive."""
    lo = x - dx
    return lo if lo > 0.0 else 0.5 * x


def _position_from_probes(p_lo: float, p_own: float, p_hi: float) -> PeakPosition:
    if p_hi > p_own and p_lo < p_own:
        return PeakPosition.BELOW_PEAK
    if p_hi < p_own and p_lo > p_own:
        return PeakPosition.ABOVE_PEAK
    return PeakPosition.AT_PEAK


def classify_position(scenario: SystemScenario, loads, n: int, dx: float) -> PeakPosition:
    """Probe-based three-way test of ``x_n`` against the receiver's own peak.

    Probes are simulated measurements at ``x_n - dx`` and ``x_n + dx`` with
    all other loads fixed; they may leave [x_min, x_max] but stay positive.
    AT_PEAK means the peak lies within one ``dx`` of the current load.
    """
    if not dx > 0:
        raise ScenarioError(f"dx must be > 0 (got {dx})")
    xs = list(as_loads(scenario, loads))
    if not 0 <= n < scenario.n:
        raise IndexError(f"receiver index {n} out of range for N={scenario.n}")
    p_own = solve_closed_form(scenario, xs).p[n]
    x_n = xs[n]
    xs[n] = _probe_lo(x_n, dx)
    p_lo = solve_closed_form(scenario, xs).p[n]
    xs[n] = x_n + dx
    p_hi = solve_closed_form(scenario, xs).p[n]
    return _position_from_probes(p_lo, p_own, p_hi)


def decide_case(
    p_own: float, p_required: float, position: PeakPosition, others_all_fed: bool
) -> Case:
    """Map one receiver's local view to the update rule it must take.

    Exact equality ``p_own == p_required`` falls through to C5: the rules
    use strict inequalities on both sides.  A hungry receiver already at its
    peak also takes C5 (it cannot improve unilaterally; the others' C3
    responses are the escape mechanism).
    """
    if p_own < p_required:
        if position is PeakPosition.BELOW_PEAK:
            return Case.C1
        if position is PeakPosition.ABOVE_PEAK:
            return Case.C2
        return Case.C5
    if p_own > p_required and position is not PeakPosition.AT_PEAK:
        return Case.C4 if others_all_fed else Case.C3
    return Case.C5


def _apply_case(case: Case, x: float, dx: float, x_min: float, x_max: float) -> float:
    if case in (Case.C1, Case.C3):
        return min(x_max, x + dx)
    if case in (Case.C2, Case.C4):
        return max(x_min, x - dx)
    return x


def agent_step(
    scenario: SystemScenario, loads, n: int, feedback: Sequence[int], dx: float
) -> tuple[float, Case]:
    """One receiver's update given the other receivers' feedback bits.

    ``feedback`` carries the N-1 bits of all receivers other than ``n`` (1
    when that receiver's demand is met).  Returns the updated ``x_n``
    (clamped into bounds) and the rule that produced it.
    """
    xs = list(as_loads(scenario, loads))
    if not 0 <= n < scenario.n:
        raise IndexError(f"receiver index {n} out of range for N={scenario.n}")
    if len(feedback) != scenario.n - 1:
        raise ScenarioError(
            f"feedback must have {scenario.n - 1} bits (got {len(feedback)})"
        )
    if not dx > 0:
        raise ScenarioError(f"dx must be > 0 (got {dx})")

    rec = scenario.receivers[n]
    p_own = solve_closed_form(scenario, xs).p[n]
    position = classify_position(scenario, xs, n, dx)
    case = decide_case(p_own, rec.p_min, position, all(bool(b) for b in feedback))
    return _apply_case(case, xs[n], dx, rec.x_min, rec.x_max), case


# --- step engine -----------------------------------------------------------
#
# The engine below is written against plain indexing and ``len`` so that the
# same source runs interpreted (on lists) and numba-compiled (on float64
# arrays).  Its arithmetic must stay expression-for-expression identical to
# ``solve_closed_form``; the test suite asserts bit-equality between the two
# execution modes and against the recording path.


def _trial_engine(r_tx, half_v2, wh2, r, x, x_min, x_max, p_min, dx, k_max, p_work):
    """Run one trial in place on ``x``.  Returns (converged, feasible, p_tx, steps)."""
    n_agents = len(x)
    trailing_c5 = 0
    steps = 0
    converged = False
    while steps < k_max:
        steps += 1
        n = (steps - 1) % n_agents

        r_in = r_tx
        for k in range(n_agents):
            r_in += wh2[k] / (r[k] + x[k])
        rr = r_in * r_in
        for k in range(n_agents):
            d = r[k] + x[k]
            p_work[k] = half_v2 * wh2[k] * x[k] / (d * d) / rr
        p_own = p_work[n]

        others_fed = True
        for m in range(n_agents):
            if m != n and p_work[m] < p_min[m]:
                others_fed = False

        x_n = x[n]
        lo = x_n - dx
        if lo <= 0.0:
            lo = 0.5 * x_n
        hi = x_n + dx

        x[n] = lo
        r_in_p = r_tx
        for k in range(n_agents):
            r_in_p += wh2[k] / (r[k] + x[k])
        d = r[n] + lo
        p_lo = half_v2 * wh2[n] * lo / (d * d) / (r_in_p * r_in_p)

        x[n] = hi
        r_in_p = r_tx
        for k in range(n_agents):
            r_in_p += wh2[k] / (r[k] + x[k])
        d = r[n] + hi
        p_hi = half_v2 * wh2[n] * hi / (d * d) / (r_in_p * r_in_p)
        x[n] = x_n

        if p_hi > p_own and p_lo < p_own:
            pos = 0  # below peak
        elif p_hi < p_own and p_lo > p_own:
            pos = 2  # above peak
        else:
            pos = 1  # at peak

        if p_own < p_min[n]:
            if pos == 0:
                case = 1
            elif pos == 2:
                case = 2
            else:
                case = 5
        elif p_own > p_min[n] and pos != 1:
            case = 4 if others_fed else 3
        else:
            case = 5

        if case == 1 or case == 3:
            x[n] = min(x_max[n], x_n + dx)
        elif case == 2 or case == 4:
            x[n] = max(x_min[n], x_n - dx)

        if case == 5:
            trailing_c5 += 1
            if trailing_c5 >= n_agents:
                converged = True
                break
        else:
            trailing_c5 = 0

    r_in = r_tx
    for k in range(n_agents):
        r_in += wh2[k] / (r[k] + x[k])
    rr = r_in * r_in
    feasible = True
    for k in range(n_agents):
        d = r[k] + x[k]
        p_work[k] = half_v2 * wh2[k] * x[k] / (d * d) / rr
        if p_work[k] < p_min[k]:
            feasible = False
    p_tx = half_v2 / r_in
    return converged, feasible, p_tx, steps


_COMPILED_ENGINE = None
_COMPILE_FAILED = False


def _fast_engine():
    """numba-compiled twin of ``_trial_engine``, or None when unavailable."""
    global _COMPILED_ENGINE, _COMPILE_FAILED
    if _COMPILED_ENGINE is not None or _COMPILE_FAILED:
        return _COMPILED_ENGINE
    try:
        from numba import njit

        _COMPILED_ENGINE = njit(cache=True)(_trial_engine)
    except Exception:  # pragma: no cover - exercised only without numba
        _COMPILE_FAILED = True
        _COMPILED_ENGINE = None
    return _COMPILED_ENGINE


def _scenario_params(scenario: SystemScenario):
    wh2 = np.array(coupling_ohms2(scenario), dtype=np.float64)
    r = np.array([rec.r for rec in scenario.receivers], dtype=np.float64)
    x_min = np.array([rec.x_min for rec in scenario.receivers], dtype=np.float64)
    x_max = np.array([rec.x_max for rec in scenario.receivers], dtype=np.float64)
    p_min = np.array([rec.p_min for rec in scenario.receivers], dtype=np.float64)
    half_v2 = 0.5 * scenario.tx.v_mag * scenario.tx.v_mag
    return scenario.tx.r_tx, half_v2, wh2, r, x_min, x_max, p_min


def run_protocol(
    scenario: SystemScenario, config: ProtocolConfig, record: bool = True
) -> ProtocolTrace:
    """Simulate one full protocol run from a seeded random starting point.

    Iterates round-robin starting at receiver 0.  At each step the active
    receiver sees feedback bits sampled at the start of the step (before it
    probes), applies one rule from C1-C5, and the loop stops at ``k_max``
    steps or as soon as N consecutive steps were silent (C5).  With
    ``record=False`` only the terminal fields of the trace are populated.
    """
    n_agents = scenario.n
    p_min = [rec.p_min for rec in scenario.receivers]
    initial = draw_initial_loads(scenario, config.seed)
    xs = list(initial)
    dx = config.dx

    records: list[StepRecord] = []
    report = solve_closed_form(scenario, xs)
    trailing_c5 = 0
    converged = False
    steps = 0
    for k in range(1, config.k_max + 1):
        steps = k
        n = (k - 1) % n_agents
        rec = scenario.receivers[n]

        feedback = tuple(1 if report.p[m] >= p_min[m] else 0 for m in range(n_agents))
        others_fed = all(feedback[m] == 1 for m in range(n_agents) if m != n)

        x_n = xs[n]
        p_own = report.p[n]
        xs[n] = _probe_lo(x_n, dx)
        p_lo = solve_closed_form(scenario, xs).p[n]
        xs[n] = x_n + dx
        p_hi = solve_closed_form(scenario, xs).p[n]
        xs[n] = x_n

        position = _position_from_probes(p_lo, p_own, p_hi)
        case = decide_case(p_own, rec.p_min, position, others_fed)
        x_new = _apply_case(case, x_n, dx, rec.x_min, rec.x_max)

        if x_new != x_n:
            xs[n] = x_new
            report = solve_closed_form(scenario, xs)

        if record:
            records.append(
                StepRecord(
                    iteration=k,
                    agent=n,
                    feedback=feedback,
                    probes=(p_lo, p_own, p_hi),
                    case=case,
                    x_new=x_new,
                    report=report,
                )
            )

        if case is Case.C5:
            trailing_c5 += 1
            if trailing_c5 >= n_agents:
                converged = True
                break
        else:
            trailing_c5 = 0

    feasible = all(report.p[m] >= p_min[m] for m in range(n_agents))
    return ProtocolTrace(
        config=config,
        initial=initial,
        records=tuple(records),
        iterations=steps,
        converged=converged,
        feasible=feasible,
        final=tuple(xs),
        final_report=report,
    )


def batch_run(
    scenario: SystemScenario, config: ProtocolConfig, trials: int
) -> BatchSummary:
    """Run ``trials`` independent protocol runs seeded ``seed, seed+1, ...``.

    The mean transmit power is taken over trials whose final loads meet
    every demand; a batch where no trial does raises
    :class:`NoFeasibleTrialsError`.  Trial outcomes are identical to
    ``run_protocol`` run per seed, just without trace recording.
    """
    if trials < 1:
        raise ScenarioError(f"trials must be >= 1 (got {trials})")

    r_tx, half_v2, wh2, r, x_min, x_max, p_min = _scenario_params(scenario)
    engine = _fast_engine()

    results: list[TrialResult] = []
    if engine is not None:
        p_work = np.empty(scenario.n, dtype=np.float64)
        for t in range(trials):
            seed = config.seed + t
            x = np.array(draw_initial_loads(scenario, seed), dtype=np.float64)
            converged, feasible, p_tx, steps = engine(
                r_tx, half_v2, wh2, r, x, x_min, x_max, p_min,
                config.dx, config.k_max, p_work,
            )
            results.append(
                TrialResult(seed, bool(converged), bool(feasible), int(steps),
                            float(p_tx), tuple(float(v) for v in x))
            )
    else:  # interpreted fallback: same engine source on plain lists
        wh2_l, r_l = list(wh2), list(r)
        xmin_l, xmax_l, pmin_l = list(x_min), list(x_max), list(p_min)
        p_work_l = [0.0] * scenario.n
        for t in range(trials):
            seed = config.seed + t
            x = list(draw_initial_loads(scenario, seed))
            converged, feasible, p_tx, steps = _trial_engine(
                r_tx, half_v2, wh2_l, r_l, x, xmin_l, xmax_l, pmin_l,
                config.dx, config.k_max, p_work_l,
            )
            results.append(
                TrialResult(seed, bool(converged), bool(feasible), int(steps),
                            float(p_tx), tuple(float(v) for v in x))
            )

    feasible_ptx = [res.p_tx for res in results if res.feasible]
    if not feasible_ptx:
        raise NoFeasibleTrialsError(
            f"all {trials} trials ended with some demand unmet"
        )
    return BatchSummary(
        trials=trials,
        n_feasible=len(feasible_ptx),
        n_infeasible=trials - len(feasible_ptx),
        n_converged=sum(1 for res in results if res.converged),
        mean_ptx_feasible=sum(feasible_ptx) / len(feasible_ptx),
        results=tuple(results),
    )


def verify_trace(scenario: SystemScenario, trace: ProtocolTrace) -> list[str]:
    """Replay a recorded trace and report every deviation found.

    Re-derives, at every step: the truthful feedback bits, the probe
    powers, the case decision, the clamped update, bounds safety, and the
    single-mutator property; then checks the terminal convergence and
    feasibility flags.  Returns a list of human-readable violations (empty
    for a sound trace).  All comparisons are exact: the recording path and
    this replay share their arithmetic.
    """
    violations: list[str] = []
    n_agents = scenario.n
    p_min = [rec.p_min for rec in scenario.receivers]
    dx = trace.config.dx
    xs = list(trace.initial)

    for idx, step in enumerate(trace.records):
        k = idx + 1
        tag = f"step {k}"
        if step.iteration != k:
            violations.append(f"{tag}: iteration index {step.iteration} != {k}")
        n = (k - 1) % n_agents
        if step.agent != n:
            violations.append(f"{tag}: agent {step.agent} breaks round-robin order")
            n = step.agent  # follow the trace to keep later checks meaningful

        report = solve_closed_form(scenario, xs)
        feedback = tuple(1 if report.p[m] >= p_min[m] else 0 for m in range(n_agents))
        if step.feedback != feedback:
            violations.append(f"{tag}: feedback {step.feedback} not truthful ({feedback})")

        x_n = xs[n]
        xs[n] = _probe_lo(x_n, dx)
        p_lo = solve_closed_form(scenario, xs).p[n]
        xs[n] = x_n + dx
        p_hi = solve_closed_form(scenario, xs).p[n]
        xs[n] = x_n
        if step.probes != (p_lo, report.p[n], p_hi):
            violations.append(f"{tag}: probe powers differ from replay")

        position = _position_from_probes(p_lo, report.p[n], p_hi)
        others_fed = all(feedback[m] == 1 for m in range(n_agents) if m != n)
        case = decide_case(report.p[n], p_min[n], position, others_fed)
        if step.case != case:
            violations.append(f"{tag}: case {step.case.name}, replay says {case.name}")

        rec = scenario.receivers[n]
        x_expected = _apply_case(case, x_n, dx, rec.x_min, rec.x_max)
        if step.x_new != x_expected:
            violations.append(f"{tag}: x_new {step.x_new} != expected {x_expected}")
        if not rec.x_min <= step.x_new <= rec.x_max:
            violations.append(f"{tag}: x_new {step.x_new} violates bounds")
        # Representation slack: x +- dx rounds to within a few ulp of x.
        delta = abs(step.x_new - x_n)
        if step.x_new != x_n and delta > dx + 32.0 * math.ulp(abs(x_n)):
            violations.append(f"{tag}: move {delta} larger than dx")

        xs[n] = step.x_new
        after = solve_closed_form(scenario, xs)
        if step.report.p != after.p or step.report.p_tx != after.p_tx:
            violations.append(f"{tag}: recorded post-step report differs from replay")

    if tuple(xs) != trace.final:
        violations.append("final loads differ from replayed loads")
    if trace.converged:
        tail = trace.records[-n_agents:]
        if len(tail) < n_agents or any(s.case is not Case.C5 for s in tail):
            violations.append("converged flag set without N trailing C5 steps")
    final_report = solve_closed_form(scenario, trace.final)
    feasible = all(final_report.p[m] >= p_min[m] for m in range(n_agents))
    if trace.feasible != feasible:
        violations.append(
            f"feasible flag {trace.feasible} does not match replay ({feasible})"
        )
    return violations
