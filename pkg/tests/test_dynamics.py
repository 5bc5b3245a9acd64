"""Sweep-dynamics oracles.

Anchors used below:

  * the local schedule has a closed-form passage time
    t(s) = N / (2 sqrt(N-1) eps E0) [arctan(sqrt(N-1)(2s-1)) + arctan sqrt(N-1)],
    so total_time is exactly N arctan(sqrt(N-1)) / (sqrt(N-1) eps E0) and
    grows as sqrt(N);
  * sudden limit: success -> 1/N; adiabatic limit: success -> 1;
  * the dephasing propagator is checked against an independent DOP853
    integration of the same Bloch equations;
  * at zero bias the (y, z) Bloch block has eigenvalues
    (-gamma +- sqrt(gamma^2 - 4 delta^2)) / 2, so Rabi oscillations die at
    exactly gamma_phi = 2 delta;
  * the two-state relaxation protocol has the textbook closed form
    p(t) = p_eq + (p0 - p_eq) exp(-(g_up + g_down) t).

Success against duration is not perfectly monotone: interference ripples at
the 1e-5 level survive near saturation at small N. Strict monotonicity is
asserted on the rising part only, with the ripple bounded separately.
"""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from openaqs.dynamics import (
    DampingClass,
    DephasingParams,
    Schedule,
    ScheduleKind,
    dephasing_rate_from_bath,
    evolve_closed,
    evolve_dephasing,
    local_total_time,
    make_linear_schedule,
    make_local_schedule,
    make_schedule,
    rabi_coherence,
    runtime_scaling,
    thermalization_protocol,
    time_to_target,
)
from openaqs.model import SearchInstance, gap, two_level_params


class TestSchedules:
    def test_linear_is_linear(self):
        sch = make_linear_schedule(8.0)
        assert sch.kind is ScheduleKind.LINEAR
        assert sch.value(4.0) == pytest.approx(0.5, abs=1e-12)
        assert sch.value(-1.0) == 0.0
        assert sch.value(99.0) == 1.0

    def test_local_total_time_closed_form(self):
        inst = SearchInstance(N=100)
        sch = make_local_schedule(inst, 0.25)
        root = np.sqrt(99.0)
        want = 100.0 / (root * 0.25) * np.arctan(root)
        assert sch.total_time == pytest.approx(want, rel=1e-14)
        assert sch.times.size >= 1001
        assert sch.values[0] == 0.0 and sch.values[-1] == 1.0

    def test_local_obeys_gap_squared_law(self):
        inst = SearchInstance(N=64)
        eps = 0.4
        sch = make_local_schedule(inst, eps, n_nodes=8001)
        dsdt = np.gradient(sch.values, sch.times)
        g = gap(inst, sch.values)
        ratio = dsdt[5:-5] * inst.E0 / g[5:-5] ** 2
        assert np.allclose(ratio, eps, rtol=1e-4)

    def test_slower_adiabaticity_stretches_time(self):
        inst = SearchInstance(N=64)
        times = [local_total_time(inst, e) for e in (0.4, 0.2, 0.1, 0.05)]
        assert np.all(np.diff(times) > 0)
        assert times[1] == pytest.approx(2 * times[0], rel=1e-14)

    def test_total_time_grows_as_sqrt_n(self):
        from openaqs.critical import power_law_fit

        ns = [2**k for k in range(6, 17, 2)]
        ts = [local_total_time(SearchInstance(N=n), 1.0) for n in ns]
        fit = power_law_fit(np.array(ns, float), np.array(ts))
        assert fit.exponent == pytest.approx(0.5, abs=0.03)

    def test_rescaling_keeps_path(self):
        inst = SearchInstance(N=32)
        sch = make_local_schedule(inst, 1.0)
        fast = sch.with_total_time(0.5 * sch.total_time)
        assert fast.total_time == pytest.approx(0.5 * sch.total_time)
        np.testing.assert_allclose(fast.values, sch.values)
        mid = 0.3 * sch.total_time
        assert fast.value(0.5 * mid) == pytest.approx(float(sch.value(mid)), abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            make_linear_schedule(0.0)
        with pytest.raises(ValueError):
            make_local_schedule(SearchInstance(N=8), -0.1)
        with pytest.raises(ValueError):
            make_local_schedule(SearchInstance(N=8), 1.0, n_nodes=10)
        with pytest.raises(ValueError):
            Schedule(ScheduleKind.LINEAR, 1.0, np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.7, 0.5]))
        with pytest.raises(ValueError):
            Schedule(ScheduleKind.LINEAR, 1.0, np.array([0.0, 1.0]), np.array([0.1, 1.0]))


class TestEvolveClosed:
    def test_adiabatic_limit(self):
        inst = SearchInstance(N=64)
        res = evolve_closed(inst, make_local_schedule(inst, 0.05))
        assert res.success_prob > 0.99
        assert res.norm_drift < 1e-9

    def test_sudden_limit(self):
        inst = SearchInstance(N=64)
        res = evolve_closed(inst, make_linear_schedule(1e-6))
        assert res.success_prob == pytest.approx(1.0 / 64.0, rel=1e-6)

    def test_slow_linear_sweep_succeeds(self):
        inst = SearchInstance(N=32)
        res = evolve_closed(inst, make_linear_schedule(50.0 * 32))
        assert res.success_prob > 0.99

    def test_success_monotone_then_ripples_stay_small(self):
        inst = SearchInstance(N=64)
        base = make_local_schedule(inst, 1.0)
        rising = [
            evolve_closed(inst, base.with_total_time(t)).success_prob
            for t in np.geomspace(5.0, 60.0, 6)
        ]
        assert np.all(np.diff(rising) > 0)
        saturated = [
            evolve_closed(inst, base.with_total_time(t)).success_prob
            for t in np.geomspace(60.0, 500.0, 6)
        ]
        assert np.all(np.diff(saturated) > -1e-4)

    def test_trajectory_sampling(self):
        inst = SearchInstance(N=16)
        sch = make_local_schedule(inst, 0.3)
        res = evolve_closed(inst, sch, n_samples=9)
        assert res.trajectory.shape == (9, 4)
        assert res.trajectory[0, 0] == 0.0
        assert res.trajectory[-1, 0] == pytest.approx(sch.total_time)
        lengths = np.linalg.norm(res.trajectory[:, 1:], axis=1)
        np.testing.assert_allclose(lengths, 1.0, atol=1e-9)
        assert 0.5 * (1.0 + res.trajectory[-1, 3]) == pytest.approx(
            res.success_prob, abs=1e-12
        )


class TestEvolveDephasing:
    def test_zero_rate_matches_closed(self):
        inst = SearchInstance(N=64)
        sch = make_local_schedule(inst, 0.3)
        closed = evolve_closed(inst, sch)
        open_ = evolve_dephasing(inst, sch, DephasingParams(0.0))
        assert open_.success_prob == pytest.approx(closed.success_prob, abs=1e-8)

    def test_against_independent_integrator(self):
        inst = SearchInstance(N=32)
        sch = make_local_schedule(inst, 0.5)
        gamma = 0.15
        mine = evolve_dephasing(inst, sch, DephasingParams(gamma), rtol=1e-11)

        def rhs(t, r):
            p = two_level_params(inst, float(sch.value(t)))
            return [
                p.epsilon * r[1] - gamma * r[0],
                -p.epsilon * r[0] + p.delta * r[2] - gamma * r[1],
                -p.delta * r[1],
            ]

        n = float(inst.N)
        r0 = [2.0 * np.sqrt(n - 1.0) / n, 0.0, (2.0 - n) / n]
        sol = solve_ivp(
            rhs, (0.0, sch.total_time), r0, method="DOP853", rtol=1e-11, atol=1e-13
        )
        assert mine.success_prob == pytest.approx(0.5 * (1.0 + sol.y[2, -1]), abs=1e-8)

    def test_strong_dephasing_mixes(self):
        inst = SearchInstance(N=64)
        res = evolve_dephasing(inst, make_linear_schedule(2000.0), DephasingParams(5.0))
        assert res.success_prob == pytest.approx(0.5, abs=5e-3)

    def test_bloch_length_never_exceeds_one(self):
        inst = SearchInstance(N=16)
        sch = make_local_schedule(inst, 0.5)
        res = evolve_dephasing(inst, sch, DephasingParams(0.3), n_samples=11)
        lengths = np.linalg.norm(res.trajectory[:, 1:], axis=1)
        assert np.all(lengths <= 1.0 + 1e-9)
        assert res.norm_drift < 1e-9

    def test_bath_bridge_convention(self):
        from openaqs.bath import BathSpec

        b = BathSpec(alpha=0.2, eta=1.0, omega_c=1.0, T=0.3)
        assert dephasing_rate_from_bath(b).gamma_phi == pytest.approx(2 * np.pi * 0.06)

    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError):
            DephasingParams(-0.1)


class TestRabiCoherence:
    def test_pure_rabi_eigenvalues(self):
        res = rabi_coherence(0.8, 0.0)
        assert res.regime is DampingClass.UNDERDAMPED
        imags = np.sort(res.eigenvalues.imag)
        np.testing.assert_allclose(imags, [-0.8, 0.0, 0.0, 0.8], atol=1e-12)

    def test_collapse_at_twice_delta(self):
        delta = 0.8
        lo, hi = 0.0, 5.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if rabi_coherence(delta, mid).regime is DampingClass.UNDERDAMPED:
                lo = mid
            else:
                hi = mid
        assert 0.5 * (lo + hi) == pytest.approx(2.0 * delta, abs=1e-6)

    def test_overdamped_region_upward_closed(self):
        regimes = [
            rabi_coherence(0.8, g).regime is DampingClass.OVERDAMPED
            for g in np.linspace(0.0, 5.0, 41)
        ]
        assert regimes == sorted(regimes)

    def test_validation(self):
        with pytest.raises(ValueError):
            rabi_coherence(0.0, 1.0)
        with pytest.raises(ValueError):
            rabi_coherence(1.0, -1.0)


class TestThermalizationProtocol:
    def test_no_wait_returns_initial_population(self):
        assert thermalization_protocol(SearchInstance(N=8), 1.0, 3.0, 0.0) == pytest.approx(1 / 8)

    def test_long_wait_reaches_equilibrium(self):
        p = thermalization_protocol(SearchInstance(N=8), 1.0, 3.0, 1e3)
        assert p == pytest.approx(0.75, rel=1e-12)

    def test_cold_bath_beats_coin_flip(self):
        # emission-dominated relaxation ends at or above one half
        p = thermalization_protocol(SearchInstance(N=1024), 0.2, 1.0, 1e4)
        assert p >= 0.5

    def test_repetitions_compound(self):
        p = thermalization_protocol(SearchInstance(N=2), 1.0, 1.0, 1e3, repetitions=5)
        assert p == pytest.approx(1.0 - 2.0**-5, rel=1e-12)

    def test_validation(self):
        inst = SearchInstance(N=4)
        with pytest.raises(ValueError):
            thermalization_protocol(inst, -1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            thermalization_protocol(inst, 1.0, 1.0, -1.0)
        with pytest.raises(ValueError):
            thermalization_protocol(inst, 1.0, 1.0, 1.0, repetitions=0)


class TestRuntimeScaling:
    NS = [64, 256, 1024, 8192]

    def test_local_schedule_runs_in_root_n_time(self):
        fit = runtime_scaling(self.NS, 0.9, ScheduleKind.LOCAL_ADIABATIC)
        assert fit.exponent == pytest.approx(0.5, abs=0.05)

    def test_linear_schedule_runs_in_linear_time(self):
        fit = runtime_scaling(self.NS, 0.9, ScheduleKind.LINEAR)
        assert fit.exponent == pytest.approx(1.0, abs=0.1)

    def test_strong_dephasing_erases_the_speedup(self):
        fit = runtime_scaling(self.NS, 0.45, ScheduleKind.LOCAL_ADIABATIC, gamma_phi=2.0)
        assert fit.exponent > 0.9

    def test_time_to_target_validation(self):
        with pytest.raises(ValueError):
            time_to_target(SearchInstance(N=8), 0.05, ScheduleKind.LINEAR)

    def test_make_schedule_dispatch(self):
        inst = SearchInstance(N=32)
        lin = make_schedule(inst, ScheduleKind.LINEAR, 7.0)
        loc = make_schedule(inst, ScheduleKind.LOCAL_ADIABATIC, 7.0)
        assert lin.kind is ScheduleKind.LINEAR and lin.total_time == 7.0
        assert loc.kind is ScheduleKind.LOCAL_ADIABATIC
        assert loc.total_time == pytest.approx(7.0)
