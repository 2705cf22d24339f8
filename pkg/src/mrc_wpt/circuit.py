"""Steady-state mesh analysis of a one-transmitter, N-receiver resonant
inductive power link.

Every coil is series-compensated so that its natural frequency equals the
source's angular frequency ``w`` (``c = 1 / (l * w**2)``); at resonance the
reactive terms cancel and the mesh equations contain only coil resistances,
load resistances, and the transmitter-receiver mutual inductances.  With the
voltage vector ``v = [v_tx, 0, ..., 0]`` the branch currents solve
``A @ i = v`` where the impedance matrix is

    A = [[ r_tx,      -j*w*h_1,  ...,  -j*w*h_N ],
         [ -j*w*h_1,  r_1+x_1,              0   ],
         [   ...,         0,     ...,      0   ],
         [ -j*w*h_N,      0,     ...,  r_N+x_N ]]

Receiver-receiver coupling is structurally zero: receiver coils are small
and mutually distant compared with the transmitter coil, so only the
transmitter row/column carries off-diagonal terms.

Eliminating the receiver rows gives the closed forms used throughout this
package.  With ``r_in = r_tx + sum_k (w*h_k)**2 / (r_k + x_k)`` (the
effective input resistance seen by the source):

    i_tx = v_tx / r_in
    i_n  = j * w*h_n / (r_n + x_n) * v_tx / r_in
    p_tx = |v_tx|**2 / (2 * r_in)
    p_n  = |v_tx|**2 / 2 * (w*h_n)**2 * x_n / (r_n + x_n)**2 / r_in**2

``solve_oracle`` answers the same question through a generic dense complex
linear solve of ``A @ i = v`` and exists purely as an independent
cross-check of the closed forms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ScenarioError",
    "TransmitterSpec",
    "ReceiverSpec",
    "SystemScenario",
    "LoadVector",
    "PowerReport",
    "build_impedance_matrix",
    "det_impedance",
    "input_resistance",
    "solve_closed_form",
    "solve_oracle",
    "admittance_first_column",
]


class ScenarioError(ValueError):
    """A scenario, load vector, or derived quantity violates a model invariant."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ScenarioError(msg)


def _finite(value: float) -> bool:
    return math.isfinite(value)


@dataclass(frozen=True)
class TransmitterSpec:
    """Driven coil: source voltage (magnitude/phase), coil resistance, self-inductance.

    The series compensation capacitance is derived from the operating
    frequency (see :meth:`SystemScenario.resonance_capacitances`) and is not
    stored here.
    """

    v_mag: float
    r_tx: float
    l_tx: float
    v_phase: float = 0.0

    def __post_init__(self) -> None:
        _require(_finite(self.v_mag) and self.v_mag > 0, f"v_mag must be > 0 (got {self.v_mag})")
        _require(_finite(self.r_tx) and self.r_tx > 0, f"r_tx must be > 0 (got {self.r_tx})")
        _require(_finite(self.l_tx) and self.l_tx > 0, f"l_tx must be > 0 (got {self.l_tx})")
        _require(_finite(self.v_phase), f"v_phase must be finite (got {self.v_phase})")

    @property
    def v_tx(self) -> complex:
        """Complex source voltage phasor."""
        return cmath.rect(self.v_mag, self.v_phase)

    @classmethod
    def from_complex(cls, v_tx: complex, r_tx: float, l_tx: float) -> "TransmitterSpec":
        return cls(v_mag=abs(v_tx), r_tx=r_tx, l_tx=l_tx, v_phase=cmath.phase(v_tx))


@dataclass(frozen=True)
class ReceiverSpec:
    """One receiver: coil parameters, transmitter coupling, load limits and demand.

    ``h`` is the mutual inductance with the transmitter coil.  ``h == 0`` is
    accepted so that fully decoupled receivers can be expressed; physical
    scenarios have ``h > 0``.
    """

    r: float
    l: float
    h: float
    x_min: float
    x_max: float
    p_min: float

    def __post_init__(self) -> None:
        _require(_finite(self.r) and self.r > 0, f"r must be > 0 (got {self.r})")
        _require(_finite(self.l) and self.l > 0, f"l must be > 0 (got {self.l})")
        _require(_finite(self.h) and self.h >= 0, f"h must be >= 0 (got {self.h})")
        _require(_finite(self.x_min) and self.x_min > 0, f"x_min must be > 0 (got {self.x_min})")
        _require(
            _finite(self.x_max) and self.x_max >= self.x_min,
            f"x_max must be >= x_min (got x_max={self.x_max}, x_min={self.x_min})",
        )
        _require(_finite(self.p_min) and self.p_min > 0, f"p_min must be > 0 (got {self.p_min})")


@dataclass(frozen=True)
class SystemScenario:
    """Full electrical description of the link.

    ``w`` is the shared resonant angular frequency in rad/s; all series
    capacitances are implied by it.  Mutual inductances must satisfy
    ``h_n <= sqrt(l_n * l_tx)`` (passivity of the coupled pair).
    """

    w: float
    tx: TransmitterSpec
    receivers: tuple[ReceiverSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "receivers", tuple(self.receivers))
        _require(_finite(self.w) and self.w > 0, f"w must be > 0 (got {self.w})")
        _require(len(self.receivers) >= 1, "at least one receiver is required")
        for k, rec in enumerate(self.receivers):
            bound = math.sqrt(rec.l * self.tx.l_tx)
            _require(
                rec.h <= bound * (1.0 + 1e-12),
                f"receivers[{k}].h exceeds sqrt(l*l_tx) (h={rec.h}, bound={bound})",
            )

    @property
    def n(self) -> int:
        """Number of receivers."""
        return len(self.receivers)

    def resonance_capacitances(self) -> tuple[float, tuple[float, ...]]:
        """Series capacitances (transmitter, receivers) that tune every coil to ``w``."""
        w2 = self.w * self.w
        return 1.0 / (self.tx.l_tx * w2), tuple(1.0 / (rec.l * w2) for rec in self.receivers)


@dataclass(frozen=True)
class LoadVector:
    """Ordered load resistances, one per receiver.  All entries must be > 0."""

    x: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        for k, v in enumerate(self.x):
            _require(_finite(v) and v > 0, f"x[{k}] must be > 0 (got {v})")

    def __len__(self) -> int:
        return len(self.x)

    def __iter__(self):
        return iter(self.x)

    def __getitem__(self, k: int) -> float:
        return self.x[k]

    def within_bounds(self, scenario: SystemScenario) -> bool:
        """True when every entry lies inside its receiver's [x_min, x_max]."""
        if len(self.x) != scenario.n:
            return False
        return all(
            rec.x_min <= v <= rec.x_max for rec, v in zip(scenario.receivers, self.x)
        )

    def require_bounds(self, scenario: SystemScenario) -> None:
        if len(self.x) != scenario.n:
            raise ScenarioError(
                f"load vector has {len(self.x)} entries, scenario has {scenario.n} receivers"
            )
        for k, (rec, v) in enumerate(zip(scenario.receivers, self.x)):
            _require(
                rec.x_min <= v <= rec.x_max,
                f"x[{k}]={v} outside [{rec.x_min}, {rec.x_max}]",
            )


@dataclass(frozen=True)
class PowerReport:
    """Currents and powers for one load setting.

    For any valid scenario: ``p_sum == sum(p)``, ``p_sum < p_tx``, and
    energy balances as ``p_tx == |i_tx|^2*r_tx/2 + sum |i_n|^2*(r_n+x_n)/2``
    (all reactive terms cancel at resonance).  These are verified by the
    test suite rather than asserted here, so that decoupled (``h = 0``)
    limits remain representable.
    """

    i_tx: complex
    i: tuple[complex, ...]
    p_tx: float
    p: tuple[float, ...]
    p_sum: float


def as_loads(scenario: SystemScenario, loads: "LoadVector | Sequence[float] | Iterable[float]") -> tuple[float, ...]:
    """Normalize ``loads`` to a tuple of floats sized to the scenario.

    Entries must be positive and finite; scenario bounds are deliberately not
    enforced here because probe and sweep evaluations are allowed to step
    outside [x_min, x_max].
    """
    xs = tuple(float(v) for v in loads)
    if len(xs) != scenario.n:
        raise ScenarioError(
            f"load vector has {len(xs)} entries, scenario has {scenario.n} receivers"
        )
    for k, v in enumerate(xs):
        _require(_finite(v) and v > 0, f"x[{k}] must be > 0 (got {v})")
    return xs


def coupling_ohms2(scenario: SystemScenario) -> tuple[float, ...]:
    """Per-receiver coupling strengths ``(w*h_n)**2`` in ohm^2."""
    return tuple((scenario.w * rec.h) * (scenario.w * rec.h) for rec in scenario.receivers)


def input_resistance(scenario: SystemScenario, loads) -> float:
    """Effective resistance seen by the source: ``r_tx + sum_k (w*h_k)^2/(r_k+x_k)``."""
    xs = as_loads(scenario, loads)
    wh2 = coupling_ohms2(scenario)
    acc = scenario.tx.r_tx
    for k, rec in enumerate(scenario.receivers):
        acc += wh2[k] / (rec.r + xs[k])
    return acc


def build_impedance_matrix(scenario: SystemScenario, loads) -> np.ndarray:
    """Assemble the (N+1)x(N+1) complex mesh impedance matrix at resonance."""
    xs = as_loads(scenario, loads)
    n = scenario.n
    a = np.zeros((n + 1, n + 1), dtype=complex)
    a[0, 0] = scenario.tx.r_tx
    for k, rec in enumerate(scenario.receivers):
        coupling = -1j * scenario.w * rec.h
        a[0, k + 1] = coupling
        a[k + 1, 0] = coupling
        a[k + 1, k + 1] = rec.r + xs[k]
    return a


def det_impedance(scenario: SystemScenario, loads) -> float:
    """Determinant of the impedance matrix, via its real product form.

    Equals ``r_in * prod_k (r_k + x_k)`` and is strictly positive for every
    valid scenario, which is what makes the mesh system always solvable.
    """
    xs = as_loads(scenario, loads)
    wh2 = coupling_ohms2(scenario)
    acc = scenario.tx.r_tx
    prod = 1.0
    for k, rec in enumerate(scenario.receivers):
        d = rec.r + xs[k]
        acc += wh2[k] / d
        prod *= d
    return acc * prod


def solve_closed_form(scenario: SystemScenario, loads) -> PowerReport:
    """Currents and powers from the eliminated (closed-form) mesh solution.

    Scalar arithmetic, evaluated receiver-by-receiver in index order; the
    protocol simulator reproduces these expressions exactly, so power values
    computed there are bit-identical to this function's.
    """
    xs = as_loads(scenario, loads)
    wh2 = coupling_ohms2(scenario)
    tx = scenario.tx
    r_in = tx.r_tx
    for k, rec in enumerate(scenario.receivers):
        r_in += wh2[k] / (rec.r + xs[k])

    v = tx.v_tx
    half_v2 = 0.5 * tx.v_mag * tx.v_mag
    i_tx = v / r_in
    p_tx = half_v2 / r_in

    rr = r_in * r_in
    currents = []
    powers = []
    p_sum = 0.0
    for k, rec in enumerate(scenario.receivers):
        d = rec.r + xs[k]
        currents.append(1j * (scenario.w * rec.h / d) * i_tx)
        p_k = half_v2 * wh2[k] * xs[k] / (d * d) / rr
        powers.append(p_k)
        p_sum += p_k

    return PowerReport(
        i_tx=i_tx, i=tuple(currents), p_tx=p_tx, p=tuple(powers), p_sum=p_sum
    )


def solve_oracle(scenario: SystemScenario, loads) -> PowerReport:
    """Currents and powers from a generic dense complex linear solve.

    Independent of the closed forms: builds the impedance matrix, solves
    ``A @ i = v`` with LAPACK, and derives powers from their definitions
    (``p_tx = Re{v_tx * conj(i_tx)}/2``, ``p_n = x_n |i_n|^2 / 2``).  A
    singular matrix (impossible for valid scenarios, where det > 0) surfaces
    as ``numpy.linalg.LinAlgError`` and signals an invariant breach.
    """
    xs = as_loads(scenario, loads)
    a = build_impedance_matrix(scenario, xs)
    rhs = np.zeros(scenario.n + 1, dtype=complex)
    rhs[0] = scenario.tx.v_tx
    currents = np.linalg.solve(a, rhs)

    i_tx = complex(currents[0])
    p_tx = 0.5 * (scenario.tx.v_tx * i_tx.conjugate()).real
    powers = [
        0.5 * xs[k] * abs(complex(currents[k + 1])) ** 2 for k in range(scenario.n)
    ]
    return PowerReport(
        i_tx=i_tx,
        i=tuple(complex(c) for c in currents[1:]),
        p_tx=p_tx,
        p=tuple(powers),
        p_sum=math.fsum(powers),
    )


def admittance_first_column(scenario: SystemScenario, loads) -> np.ndarray:
    """First column of the inverse impedance matrix, in closed form.

    Entry 0 is ``1/r_in``; entry n is ``j*w*h_n/(r_n+x_n) / r_in``.  The
    current vector is this column scaled by ``v_tx``.
    """
    xs = as_loads(scenario, loads)
    r_in = input_resistance(scenario, xs)
    col = np.empty(scenario.n + 1, dtype=complex)
    col[0] = 1.0 / r_in
    for k, rec in enumerate(scenario.receivers):
        col[k + 1] = 1j * scenario.w * rec.h / (rec.r + xs[k]) / r_in
    return col
