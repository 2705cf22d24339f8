import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrc_wpt.circuit import (
    LoadVector,
    ReceiverSpec,
    ScenarioError,
    SystemScenario,
    TransmitterSpec,
    admittance_first_column,
    build_impedance_matrix,
    det_impedance,
    input_resistance,
    solve_closed_form,
    solve_oracle,
)
from mrc_wpt.sampling import random_loads, random_scenario

from helpers import rel

BENCH_LOADS = (7.5, 7.5, 7.5)
# Frozen regression value, confirmed against solve_oracle (generic linear
# solve) before being hard-coded here.
BENCH_PTX = 125.63094653146918


def single_receiver(h=1.8e-6, x=7.5, r=0.15, x_min=0.01, x_max=100.0):
    tx = TransmitterSpec(v_mag=30.0, r_tx=0.35, l_tx=6.35e-6)
    rec = ReceiverSpec(r=r, l=0.85e-6, h=h, x_min=x_min, x_max=x_max, p_min=1.0)
    return SystemScenario(w=2.2e6, tx=tx, receivers=(rec,)), (x,)


class TestTypes:
    def test_transmitter_rejects_nonpositive(self):
        with pytest.raises(ScenarioError):
            TransmitterSpec(v_mag=0.0, r_tx=0.35, l_tx=6.35e-6)
        with pytest.raises(ScenarioError):
            TransmitterSpec(v_mag=30.0, r_tx=-1.0, l_tx=6.35e-6)
        with pytest.raises(ScenarioError):
            TransmitterSpec(v_mag=30.0, r_tx=0.35, l_tx=0.0)

    def test_transmitter_phase_round_trip(self):
        tx = TransmitterSpec.from_complex(3 + 4j, r_tx=0.5, l_tx=1e-6)
        assert tx.v_mag == pytest.approx(5.0)
        assert tx.v_tx == pytest.approx(3 + 4j)

    def test_receiver_rejects_bad_bounds(self):
        with pytest.raises(ScenarioError):
            ReceiverSpec(r=0.1, l=1e-6, h=1e-6, x_min=2.0, x_max=1.0, p_min=1.0)
        with pytest.raises(ScenarioError):
            ReceiverSpec(r=0.1, l=1e-6, h=1e-6, x_min=0.0, x_max=1.0, p_min=1.0)
        with pytest.raises(ScenarioError):
            ReceiverSpec(r=0.1, l=1e-6, h=1e-6, x_min=0.1, x_max=1.0, p_min=0.0)

    def test_scenario_rejects_overcoupling(self):
        tx = TransmitterSpec(v_mag=30.0, r_tx=0.35, l_tx=1e-6)
        rec = ReceiverSpec(r=0.1, l=1e-6, h=2e-6, x_min=0.1, x_max=1.0, p_min=1.0)
        with pytest.raises(ScenarioError):
            SystemScenario(w=1e6, tx=tx, receivers=(rec,))

    def test_scenario_rejects_empty(self):
        tx = TransmitterSpec(v_mag=30.0, r_tx=0.35, l_tx=1e-6)
        with pytest.raises(ScenarioError):
            SystemScenario(w=1e6, tx=tx, receivers=())

    def test_resonance_capacitances(self, fig2):
        c_tx, c_rx = fig2.resonance_capacitances()
        w = fig2.w
        assert 1.0 / math.sqrt(fig2.tx.l_tx * c_tx) == pytest.approx(w, rel=1e-12)
        for rec, c in zip(fig2.receivers, c_rx):
            assert 1.0 / math.sqrt(rec.l * c) == pytest.approx(w, rel=1e-12)

    def test_load_vector_validation(self):
        with pytest.raises(ScenarioError):
            LoadVector((1.0, -2.0))
        lv = LoadVector((1.0, 2.0, 3.0))
        assert len(lv) == 3 and list(lv) == [1.0, 2.0, 3.0] and lv[1] == 2.0

    def test_load_vector_bounds(self, fig2):
        assert LoadVector(BENCH_LOADS).within_bounds(fig2)
        outside = LoadVector((200.0, 7.5, 7.5))
        assert not outside.within_bounds(fig2)
        with pytest.raises(ScenarioError):
            outside.require_bounds(fig2)

    def test_dimension_mismatch_signals_invalid_scenario(self, fig2):
        with pytest.raises(ScenarioError):
            solve_closed_form(fig2, (7.5, 7.5))


class TestImpedanceMatrix:
    def test_bench_entries(self, fig2):
        a = build_impedance_matrix(fig2, BENCH_LOADS)
        assert a.shape == (4, 4)
        assert a[0, 0] == pytest.approx(0.35)
        assert a[0, 1] == pytest.approx(-5.06j, rel=1e-12)
        assert a[1, 0] == pytest.approx(-5.06j, rel=1e-12)
        assert a[1, 1] == pytest.approx(7.65)
        assert a[2, 2] == pytest.approx(7.65)
        assert a[1, 2] == 0 and a[2, 1] == 0 and a[2, 3] == 0

    def test_decoupled_receiver_gives_diagonal(self):
        scenario, loads = single_receiver(h=0.0)
        a = build_impedance_matrix(scenario, loads)
        assert a[0, 1] == 0 and a[1, 0] == 0

    def test_det_matches_generic(self, fig2, rng):
        for _ in range(50):
            s = random_scenario(rng)
            xs = random_loads(rng, s)
            closed = det_impedance(s, xs)
            generic = np.linalg.det(build_impedance_matrix(s, xs))
            assert closed > 0
            assert rel(closed, complex(generic)) < 1e-12

    def test_det_decoupled(self):
        scenario, loads = single_receiver(h=0.0, x=7.5)
        assert det_impedance(scenario, loads) == pytest.approx(0.35 * 7.65, rel=1e-15)

    def test_det_positive_under_load_scaling(self, rng):
        for _ in range(30):
            s = random_scenario(rng)
            xs = np.array(random_loads(rng, s).x)
            for factor in (1.0, 3.0, 10.0, 100.0):
                assert det_impedance(s, tuple(xs * factor)) > 0


class TestClosedForm:
    def test_bench_power(self, fig2):
        rep = solve_closed_form(fig2, BENCH_LOADS)
        assert rep.p_tx == pytest.approx(BENCH_PTX, rel=1e-12)
        assert rep.p_tx == pytest.approx(125.6, abs=0.1)
        assert rep.p_sum == pytest.approx(sum(rep.p), rel=1e-12)
        assert rep.p_sum < rep.p_tx

    def test_decoupled_limit(self):
        tx = TransmitterSpec(v_mag=30.0, r_tx=0.35, l_tx=6.35e-6)
        recs = tuple(
            ReceiverSpec(r=0.15, l=0.85e-6, h=0.0, x_min=0.01, x_max=100.0, p_min=1.0)
            for _ in range(3)
        )
        s = SystemScenario(w=2.2e6, tx=tx, receivers=recs)
        rep = solve_closed_form(s, (5.0, 6.0, 7.0))
        assert rep.p_tx == pytest.approx(30.0**2 / (2 * 0.35), rel=1e-15)
        assert rep.i == (0j, 0j, 0j)
        assert rep.p == (0.0, 0.0, 0.0)

    def test_own_peak_location_bench(self, fig2):
        # p_1 over x_1 with the other loads at 7.5 ohm peaks near 15.8 ohm.
        def p1(x1):
            return solve_closed_form(fig2, (x1, 7.5, 7.5)).p[0]

        assert p1(15.8) > p1(10.0)
        assert p1(15.8) > p1(25.0)

    def test_powers_ignore_source_phase(self, fig2):
        import dataclasses

        rotated = dataclasses.replace(
            fig2, tx=dataclasses.replace(fig2.tx, v_phase=2.1)
        )
        a = solve_closed_form(fig2, BENCH_LOADS)
        b = solve_closed_form(rotated, BENCH_LOADS)
        assert a.p_tx == b.p_tx and a.p == b.p
        oa = solve_oracle(fig2, BENCH_LOADS)
        ob = solve_oracle(rotated, BENCH_LOADS)
        assert rel(oa.p_tx, ob.p_tx) < 1e-12
        assert all(rel(x, y) < 1e-12 for x, y in zip(oa.p, ob.p))


class TestOracleEquivalence:
    def test_bench(self, fig2):
        rep = solve_closed_form(fig2, BENCH_LOADS)
        orc = solve_oracle(fig2, BENCH_LOADS)
        assert rel(rep.i_tx, orc.i_tx) < 1e-12
        for a, b in zip(rep.i, orc.i):
            assert rel(a, b) < 1e-12

    def test_oracle_decoupled_current_exact_zero(self):
        scenario, loads = single_receiver(h=0.0)
        assert solve_oracle(scenario, loads).i[0] == 0j

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_randomized_equivalence_and_conservation(self, seed):
        rng = np.random.default_rng(seed)
        s = random_scenario(rng)
        xs = random_loads(rng, s)
        rep = solve_closed_form(s, xs)
        orc = solve_oracle(s, xs)

        assert rel(rep.i_tx, orc.i_tx) < 1e-9
        assert rel(rep.p_tx, orc.p_tx) < 1e-9
        assert rel(rep.p_sum, orc.p_sum) < 1e-9
        for a, b in zip(rep.i, orc.i):
            assert rel(a, b) < 1e-9
        for a, b in zip(rep.p, orc.p):
            assert rel(a, b) < 1e-9

        dissipated = 0.5 * abs(rep.i_tx) ** 2 * s.tx.r_tx
        for k, rec in enumerate(s.receivers):
            dissipated += 0.5 * abs(rep.i[k]) ** 2 * (rec.r + xs[k])
        assert rel(rep.p_tx, dissipated) < 1e-10
        assert rep.p_sum < rep.p_tx

    def test_admittance_column_matches_generic_inverse(self, rng):
        for _ in range(100):
            s = random_scenario(rng)
            xs = random_loads(rng, s)
            closed = admittance_first_column(s, xs)
            generic = np.linalg.inv(build_impedance_matrix(s, xs))[:, 0]
            for a, b in zip(closed, generic):
                assert rel(complex(a), complex(b)) < 1e-9

    def test_input_resistance_is_reciprocal_of_admittance_head(self, fig2):
        r_in = input_resistance(fig2, BENCH_LOADS)
        col = admittance_first_column(fig2, BENCH_LOADS)
        assert rel(1.0 / r_in, complex(col[0])) < 1e-15

    def test_currents_definition(self, fig2):
        # p_tx = Re{v i_tx*}/2 and p_n = x_n |i_n|^2 / 2 on the closed forms.
        rep = solve_closed_form(fig2, BENCH_LOADS)
        v = fig2.tx.v_tx
        assert rel(rep.p_tx, 0.5 * (v * rep.i_tx.conjugate()).real) < 1e-14
        for k, x in enumerate(BENCH_LOADS):
            assert rel(rep.p[k], 0.5 * x * abs(rep.i[k]) ** 2) < 1e-14
