"""Structural properties of the delivered-power functions.

Holding all other loads fixed, the power delivered to receiver n is a
unimodal function of its own load x_n: it rises up to a unique peak and
falls beyond it.  The peak location depends only on the *other* loads,
through the coupling term

    phi_n    = sum_{k != n} (w*h_k)^2 / (r_k + x_k)
    x_peak_n = (r_n * (r_tx + phi_n) + (w*h_n)^2) / (r_tx + phi_n)

The transmit power and every other receiver's power are strictly increasing
in x_n.  The aggregate delivered power is increasing in x_n whenever
``r_tx + phi_n - 2*varphi_n <= 0`` with

    varphi_n = sum_{k != n} (w*h_k)^2 * x_k / (r_k + x_k)^2,

and otherwise peaks at

    x_sum_peak_n = (r_n*(r_tx+phi_n) + (w*h_n)^2 + 2*r_n*varphi_n)
                   / (r_tx + phi_n - 2*varphi_n).

These closed forms drive both the insight reports and the correctness tests
of the distributed load-adjustment protocol, which discovers the peak by
probing rather than by formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .circuit import (
    PowerReport,
    ScenarioError,
    SystemScenario,
    as_loads,
    coupling_ohms2,
    solve_closed_form,
)

__all__ = [
    "ReceiverSensitivity",
    "sensitivity",
    "peak_load",
    "sum_peak_load",
    "sweep",
]


@dataclass(frozen=True)
class ReceiverSensitivity:
    """How receiver ``n``'s load steers the power flows, at the given loads.

    ``x_ddot`` is ``None`` when the aggregate power is monotone increasing in
    x_n (no finite peak); it is kept as an explicit non-numeric marker so it
    cannot be fed into arithmetic by accident.
    """

    n: int
    phi: float
    varphi: float
    x_dot: float
    x_ddot: float | None


def _check_index(scenario: SystemScenario, n: int) -> None:
    if not 0 <= n < scenario.n:
        raise IndexError(f"receiver index {n} out of range for N={scenario.n}")


def _coupling_sums(scenario: SystemScenario, xs: Sequence[float], n: int) -> tuple[float, float]:
    wh2 = coupling_ohms2(scenario)
    phi = 0.0
    varphi = 0.0
    for k, rec in enumerate(scenario.receivers):
        if k == n:
            continue
        d = rec.r + xs[k]
        phi += wh2[k] / d
        varphi += wh2[k] * xs[k] / (d * d)
    return phi, varphi


def sensitivity(scenario: SystemScenario, loads, n: int) -> ReceiverSensitivity:
    """Coupling terms and peak locations for receiver ``n`` (0-based)."""
    _check_index(scenario, n)
    xs = as_loads(scenario, loads)
    wh2_n = coupling_ohms2(scenario)[n]
    r_n = scenario.receivers[n].r
    r_tx = scenario.tx.r_tx
    phi, varphi = _coupling_sums(scenario, xs, n)

    x_dot = (r_n * (r_tx + phi) + wh2_n) / (r_tx + phi)

    denom = r_tx + phi - 2.0 * varphi
    if denom <= 0.0:
        x_ddot = None
    else:
        x_ddot = (r_n * (r_tx + phi) + wh2_n + 2.0 * r_n * varphi) / denom

    return ReceiverSensitivity(n=n, phi=phi, varphi=varphi, x_dot=x_dot, x_ddot=x_ddot)


def peak_load(scenario: SystemScenario, loads, n: int) -> float:
    """Load value maximizing receiver ``n``'s own delivered power.

    Depends only on the other receivers' loads; the current value of
    ``loads[n]`` does not enter the formula.  Always exceeds ``r_n``.
    """
    return sensitivity(scenario, loads, n).x_dot


def sum_peak_load(scenario: SystemScenario, loads, n: int) -> float | None:
    """Load value maximizing the aggregate delivered power, or ``None``.

    ``None`` means the aggregate power strictly increases over all
    ``x_n > 0`` (the monotone regime).
    """
    return sensitivity(scenario, loads, n).x_ddot


def sweep(
    scenario: SystemScenario, loads, n: int, grid: Sequence[float]
) -> list[tuple[float, PowerReport]]:
    """Evaluate the full power report along a grid of values for ``x_n``.

    All other loads stay fixed at their ``loads`` values; the entry
    ``loads[n]`` itself is replaced by each grid value in turn.  Grid values
    need only be positive, they may leave [x_min, x_max].
    """
    _check_index(scenario, n)
    xs = list(as_loads(scenario, loads))
    rows: list[tuple[float, PowerReport]] = []
    for g in grid:
        gv = float(g)
        if not (math.isfinite(gv) and gv > 0):
            raise ScenarioError(f"grid value must be > 0 (got {g})")
        xs[n] = gv
        rows.append((gv, solve_closed_form(scenario, xs)))
    return rows
