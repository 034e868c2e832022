"""Backend parity: the compiled kernels must match the pure-Python twins."""

import numpy as np
import pytest

from pvbatsim import _kernels
from pvbatsim._kernels import _pure

_core = pytest.importorskip(
    "pvbatsim._kernels._core", reason="compiled kernel extension not built"
)

VT = 1.2024


def test_selected_backend_reported():
    assert _kernels.backend_name() in ("pure", "cython")


class TestDiodeParity:
    def test_residual_matches(self):
        rng = np.random.RandomState(101)
        for _ in range(500):
            i = rng.uniform(-1.0, 6.0)
            v = rng.uniform(0.0, 25.0)
            a = _pure.diode_residual(i, v, 4.95, 7e-8, 0.16, 200.0, VT)
            b = _core.diode_residual(i, v, 4.95, 7e-8, 0.16, 200.0, VT)
            assert b == pytest.approx(a, rel=1e-14, abs=1e-300)

    def test_solve_matches(self):
        rng = np.random.RandomState(103)
        for _ in range(200):
            v = rng.uniform(0.0, 22.0)
            g_scale = rng.uniform(0.05, 1.0)
            ia, ra, _ = _pure.solve_diode_current(v, 4.95 * g_scale, 7e-8, 0.16, 200.0, VT)
            ib, rb, _ = _core.solve_diode_current(v, 4.95 * g_scale, 7e-8, 0.16, 200.0, VT)
            assert ib == pytest.approx(ia, rel=1e-12, abs=1e-15)
            assert abs(ra) <= 1e-12 and abs(rb) <= 1e-12

    def test_voc_matches(self):
        rng = np.random.RandomState(107)
        for _ in range(200):
            i_ph = rng.uniform(0.0, 6.0)
            va = _pure.open_circuit_voltage(i_ph, 7e-8, 200.0, VT)
            vb = _core.open_circuit_voltage(i_ph, 7e-8, 200.0, VT)
            assert vb == pytest.approx(va, rel=1e-12, abs=1e-12)


class TestBatteryParity:
    def test_formulas_match(self):
        rng = np.random.RandomState(109)
        for _ in range(500):
            soc = rng.uniform(0.01, 0.99)
            i = rng.uniform(0.0, 40.0)
            dt = rng.uniform(-10.0, 25.0)
            assert _core.capacity_ah(i, dt, 100.0, 1.76) == pytest.approx(
                _pure.capacity_ah(i, dt, 100.0, 1.76), rel=1e-14
            )
            assert _core.discharge_voltage(soc, i, 100.0, dt, 24.0, 1.3) == pytest.approx(
                _pure.discharge_voltage(soc, i, 100.0, dt, 24.0, 1.3), rel=1e-14
            )
            assert _core.charge_voltage(soc, i, 100.0, dt, 24.0) == pytest.approx(
                _pure.charge_voltage(soc, i, 100.0, dt, 24.0), rel=1e-14
            )

    def test_fixed_point_matches(self):
        rng = np.random.RandomState(113)
        for _ in range(300):
            soc = rng.uniform(0.1, 0.9)
            # keep discharge setpoints inside the deliverable envelope
            p_max = max(
                i * _pure.discharge_voltage(soc, i, 100.0, 0.0, 24.0, 1.3)
                for i in np.linspace(0.1, 60.0, 120)
            )
            p = rng.uniform(-2000.0, 0.9 * p_max)
            ia, ra, _ = _pure.battery_current_for_power(p, soc, 100.0, 0.0, 24.0, 1.0, 1.3)
            ib, rb, _ = _core.battery_current_for_power(p, soc, 100.0, 0.0, 24.0, 1.0, 1.3)
            assert ib == pytest.approx(ia, rel=1e-12, abs=1e-15)
            tol = 1e-9 * max(1.0, abs(p))
            assert abs(ra) <= tol and abs(rb) <= tol

    def test_infeasible_setpoints_agree(self):
        # beyond the deliverable maximum both backends stall identically
        ia, ra, _ = _pure.battery_current_for_power(5000.0, 0.15, 100.0, 0.0, 24.0, 1.0, 1.3)
        ib, rb, _ = _core.battery_current_for_power(5000.0, 0.15, 100.0, 0.0, 24.0, 1.0, 1.3)
        assert abs(ra) > 1.0 and abs(rb) > 1.0
        assert ib == pytest.approx(ia, rel=1e-12)
