# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

Mirrors ``pvbatsim._kernels._pure`` expression-for-expression; the backend
parity test pins the two together. Edit both or neither.
"""

from libc.math cimport exp, fabs, log, pow

cdef double _EXP_CAP = 600.0


cdef inline double _safe_exp(double x) nogil:
    if x > _EXP_CAP:
        x = _EXP_CAP
    return exp(x)


cdef inline double _residual(double i, double v, double i_ph, double i_0,
                             double r_s, double r_sh, double vt) nogil:
    cdef double arg = (v + r_s * i) / vt
    return i_ph - i_0 * (_safe_exp(arg) - 1.0) - (v + r_s * i) / r_sh - i


def diode_residual(double i, double v, double i_ph, double i_0,
                   double r_s, double r_sh, double vt):
    """Residual of the implicit panel equation at current ``i`` (amps)."""
    return _residual(i, v, i_ph, i_0, r_s, r_sh, vt)


def solve_diode_current(double v, double i_ph, double i_0, double r_s,
                        double r_sh, double vt, double tol=1e-12,
                        int max_iter=200):
    """Bisection + safeguarded Newton solve; see the pure twin for details."""
    cdef double f0 = _residual(0.0, v, i_ph, i_0, r_s, r_sh, vt)
    if f0 == 0.0:
        return 0.0, 0.0, 0
    cdef double lo = -10.0 * i_0
    cdef double hi = i_ph + 1.0
    cdef double f_lo = _residual(lo, v, i_ph, i_0, r_s, r_sh, vt)
    cdef int extend = 0
    while f_lo < 0.0 and extend < 64:
        lo = lo * 10.0 - 1.0
        f_lo = _residual(lo, v, i_ph, i_0, r_s, r_sh, vt)
        extend += 1

    cdef double i = 0.5 * (lo + hi)
    cdef double f = _residual(i, v, i_ph, i_0, r_s, r_sh, vt)
    cdef int iters = 0
    cdef double arg, fp, step, i_new
    while iters < max_iter:
        iters += 1
        if fabs(f) <= tol:
            return i, f, iters
        if hi - lo > 1e-3:
            if f > 0.0:
                lo = i
            else:
                hi = i
            i = 0.5 * (lo + hi)
        else:
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
        f = _residual(i, v, i_ph, i_0, r_s, r_sh, vt)
    return i, f, iters


def open_circuit_voltage(double i_ph, double i_0, double r_sh, double vt,
                         double tol=1e-12, int max_iter=200):
    """Panel open-circuit voltage: zero of ``i_ph - i_0*(exp(v/vt)-1) - v/r_sh``."""
    if i_ph <= 0.0:
        return 0.0
    cdef double lo = 0.0
    cdef double hi = vt * log(i_ph / i_0 + 1.0) + 1.0
    cdef double v = 0.5 * (lo + hi)
    cdef double f, fp, v_new
    cdef int it
    for it in range(max_iter):
        f = i_ph - i_0 * (_safe_exp(v / vt) - 1.0) - v / r_sh
        if fabs(f) <= tol:
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


cdef inline double _capacity(double i_a, double delta_t, double c10,
                             double coeff) nogil:
    cdef double i10 = c10 / 10.0
    return c10 * coeff * (1.0 + 0.005 * delta_t) / (1.0 + 0.67 * (i_a / i10))


cdef inline double _discharge_v(double soc, double i_a, double c10,
                                double delta_t, double n_serial,
                                double current_exp) nogil:
    if i_a == 0.0:
        return n_serial * (1.965 + 0.12 * soc)
    cdef double sag = (i_a / c10) * (
        4.0 / (1.0 + pow(i_a, current_exp)) + 0.27 / pow(soc, 1.5) + 0.02
    ) * (1.0 - 0.007 * delta_t)
    return n_serial * (1.965 + 0.12 * soc) - n_serial * sag


cdef inline double _charge_v(double soc, double i_a, double c10,
                             double delta_t, double n_serial) nogil:
    if i_a == 0.0:
        return n_serial * (2.0 + 0.16 * soc)
    cdef double rise = (i_a / c10) * (
        6.0 / (1.0 + pow(i_a, 0.86)) + 0.48 / pow(1.0 - soc, 1.2) + 0.036
    ) * (1.0 - 0.025 * delta_t)
    return n_serial * (2.0 + 0.16 * soc) + n_serial * rise


def capacity_ah(double i_a, double delta_t, double c10, double coeff):
    """Available capacity at discharge current ``i_a`` and heat deviation ``delta_t``."""
    return _capacity(i_a, delta_t, c10, coeff)


def discharge_voltage(double soc, double i_a, double c10, double delta_t,
                      double n_serial, double current_exp):
    """String terminal voltage while discharging at ``i_a`` amps (magnitude)."""
    return _discharge_v(soc, i_a, c10, delta_t, n_serial, current_exp)


def charge_voltage(double soc, double i_a, double c10, double delta_t,
                   double n_serial):
    """String terminal voltage while charging at ``i_a`` amps (magnitude)."""
    return _charge_v(soc, i_a, c10, delta_t, n_serial)


def battery_current_for_power(double p, double soc, double c10, double delta_t,
                              double n_serial, double n_parallel,
                              double discharge_exp, double tol_rel=1e-9,
                              int max_iter=60):
    """Damped fixed point for the bank current delivering power ``p``."""
    if p == 0.0:
        return 0.0, 0.0, 0
    cdef double tol = tol_rel * max(1.0, fabs(p))
    cdef bint discharging = p > 0.0
    cdef double i = 0.0
    cdef double v
    if discharging:
        v = _discharge_v(soc, 0.0, c10, delta_t, n_serial, discharge_exp)
    else:
        v = _charge_v(soc, 0.0, c10, delta_t, n_serial)
    cdef double residual = -p
    cdef double prev_abs = fabs(residual)
    cdef double i_next, i_str
    cdef int it
    for it in range(1, max_iter + 1):
        if v <= 0.0:
            return i, residual, it
        i_next = p / v
        i_str = fabs(i_next) / n_parallel
        if discharging:
            v = _discharge_v(soc, i_str, c10, delta_t, n_serial, discharge_exp)
        else:
            v = _charge_v(soc, i_str, c10, delta_t, n_serial)
        residual = i_next * v - p
        if fabs(residual) >= prev_abs:
            i_next = 0.5 * (i + i_next)
            i_str = fabs(i_next) / n_parallel
            if discharging:
                v = _discharge_v(soc, i_str, c10, delta_t, n_serial, discharge_exp)
            else:
                v = _charge_v(soc, i_str, c10, delta_t, n_serial)
            residual = i_next * v - p
        if fabs(residual) <= tol:
            return i_next, residual, it
        prev_abs = fabs(residual)
        i = i_next
    return i, residual, max_iter
