"""Pure-Python numeric kernels.

Reference implementation of the hot inner loops (implicit diode solve,
battery terminal-voltage laws and the power->current fixed point). The
compiled module ``pvbatsim._kernels._core`` mirrors these functions
expression-for-expression; keep both in sync.
"""

import math

# exp() saturates here to keep the bracketing residual finite and monotone
# far outside the physical operating range.
_EXP_CAP = 600.0


def _safe_exp(x):
    if x > _EXP_CAP:
        x = _EXP_CAP
    return math.exp(x)


def diode_residual(i, v, i_ph, i_0, r_s, r_sh, vt):
    """Residual of the implicit panel equation at current ``i`` (amps)."""
    arg = (v + r_s * i) / vt
    return i_ph - i_0 * (_safe_exp(arg) - 1.0) - (v + r_s * i) / r_sh - i


def solve_diode_current(v, i_ph, i_0, r_s, r_sh, vt, tol=1e-12, max_iter=200):
    """Solve the implicit diode equation for the panel current at voltage ``v``.

    Bracketed bisection narrows to 1e-3 A, then safeguarded Newton finishes.
    Returns ``(i, residual, iterations)``; the caller checks the residual
    against its contract.
    """
    # exact zero-current solution (dark panel at zero bias) short-circuits
    f0 = diode_residual(0.0, v, i_ph, i_0, r_s, r_sh, vt)
    if f0 == 0.0:
        return 0.0, 0.0, 0
    lo = -10.0 * i_0
    hi = i_ph + 1.0
    f_lo = diode_residual(lo, v, i_ph, i_0, r_s, r_sh, vt)
    # v above open-circuit pushes the root negative; widen downward.
    extend = 0
    while f_lo < 0.0 and extend < 64:
        lo = lo * 10.0 - 1.0
        f_lo = diode_residual(lo, v, i_ph, i_0, r_s, r_sh, vt)
        extend += 1

    i = 0.5 * (lo + hi)
    f = diode_residual(i, v, i_ph, i_0, r_s, r_sh, vt)
    iters = 0
    while iters < max_iter:
        iters += 1
        if abs(f) <= tol:
            return i, f, iters
        if hi - lo > 1e-3:
            # bisection phase: residual is strictly decreasing in i
            if f > 0.0:
                lo = i
            else:
                hi = i
            i = 0.5 * (lo + hi)
        else:
            # Newton phase, kept inside the bracket
            if f > 0.0:
                lo = i
            else:
                hi = i
            arg = (v + r_s * i) / vt
            fp = -i_0 * _safe_exp(arg) * (r_s / vt) - r_s / r_sh - 1.0
            step = f / fp
            i_new = i - step
            if i_new <= lo or i_new >= hi:
                i_new = 0.5 * (lo + hi)
            i = i_new
        f = diode_residual(i, v, i_ph, i_0, r_s, r_sh, vt)
    return i, f, iters


def open_circuit_voltage(i_ph, i_0, r_sh, vt, tol=1e-12, max_iter=200):
    """Panel open-circuit voltage: zero of ``i_ph - i_0*(exp(v/vt)-1) - v/r_sh``."""
    if i_ph <= 0.0:
        return 0.0
    lo = 0.0
    hi = vt * math.log(i_ph / i_0 + 1.0) + 1.0
    v = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f = i_ph - i_0 * (_safe_exp(v / vt) - 1.0) - v / r_sh
        if abs(f) <= tol:
            return v
        if hi - lo > 1e-6:
            if f > 0.0:
                lo = v
            else:
                hi = v
            v = 0.5 * (lo + hi)
        else:
            if f > 0.0:
                lo = v
            else:
                hi = v
            fp = -i_0 * _safe_exp(v / vt) / vt - 1.0 / r_sh
            v_new = v - f / fp
            if v_new <= lo or v_new >= hi:
                v_new = 0.5 * (lo + hi)
            v = v_new
    return v


def capacity_ah(i_a, delta_t, c10, coeff):
    """Available capacity at discharge current ``i_a`` and heat deviation ``delta_t``."""
    i10 = c10 / 10.0
    return c10 * coeff * (1.0 + 0.005 * delta_t) / (1.0 + 0.67 * (i_a / i10))


def discharge_voltage(soc, i_a, c10, delta_t, n_serial, current_exp):
    """String terminal voltage while discharging at ``i_a`` amps (magnitude).

    At zero current only the affine open-circuit part remains (the singular
    1/SOC^1.5 term carries a zero factor and is skipped outright).
    """
    if i_a == 0.0:
        return n_serial * (1.965 + 0.12 * soc)
    sag = (i_a / c10) * (
        4.0 / (1.0 + i_a**current_exp) + 0.27 / soc**1.5 + 0.02
    ) * (1.0 - 0.007 * delta_t)
    return n_serial * (1.965 + 0.12 * soc) - n_serial * sag


def charge_voltage(soc, i_a, c10, delta_t, n_serial):
    """String terminal voltage while charging at ``i_a`` amps (magnitude).

    At zero current only the affine open-circuit part remains.
    """
    if i_a == 0.0:
        return n_serial * (2.0 + 0.16 * soc)
    rise = (i_a / c10) * (
        6.0 / (1.0 + i_a**0.86) + 0.48 / (1.0 - soc) ** 1.2 + 0.036
    ) * (1.0 - 0.025 * delta_t)
    return n_serial * (2.0 + 0.16 * soc) + n_serial * rise


def battery_current_for_power(p, soc, c10, delta_t, n_serial, n_parallel,
                              discharge_exp, tol_rel=1e-9, max_iter=60):
    """Solve the bank current delivering power ``p`` (positive = discharge).

    The terminal voltage depends on the current, so ``i = p / v(i)`` is
    iterated as a damped fixed point. Returns ``(i_bank, residual, iterations)``
    with ``residual = i*v(i) - p``.
    """
    if p == 0.0:
        return 0.0, 0.0, 0
    tol = tol_rel * max(1.0, abs(p))
    discharging = p > 0.0
    i = 0.0
    v = (
        discharge_voltage(soc, 0.0, c10, delta_t, n_serial, discharge_exp)
        if discharging
        else charge_voltage(soc, 0.0, c10, delta_t, n_serial)
    )
    residual = -p
    prev_abs = abs(residual)
    for it in range(1, max_iter + 1):
        if v <= 0.0:
            # voltage collapsed: the setpoint exceeds deliverable power
            return i, residual, it
        i_next = p / v
        i_str = abs(i_next) / n_parallel
        v = (
            discharge_voltage(soc, i_str, c10, delta_t, n_serial, discharge_exp)
            if discharging
            else charge_voltage(soc, i_str, c10, delta_t, n_serial)
        )
        residual = i_next * v - p
        if abs(residual) >= prev_abs:
            # overshoot: damp toward the previous iterate
            i_next = 0.5 * (i + i_next)
            i_str = abs(i_next) / n_parallel
            v = (
                discharge_voltage(soc, i_str, c10, delta_t, n_serial, discharge_exp)
                if discharging
                else charge_voltage(soc, i_str, c10, delta_t, n_serial)
            )
            residual = i_next * v - p
        if abs(residual) <= tol:
            return i_next, residual, it
        prev_abs = abs(residual)
        i = i_next
    return i, residual, max_iter
