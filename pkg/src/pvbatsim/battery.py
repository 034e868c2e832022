"""Lead-acid battery bank model.

Capacity shrinks with discharge current and grows with temperature; state of
charge is tracked by coulomb counting; the terminal voltage follows separate
charge and discharge laws fitted per cell and scaled by the series cell
count. Sign convention throughout: positive battery current = discharge.
"""

from dataclasses import dataclass, replace

from pvbatsim import _kernels
from pvbatsim.errors import ConvergenceError, DomainError, SingularityGuardError

#: SOC band outside which the voltage laws are refused (1/SOC^1.5 and
#: 1/(1-SOC)^1.2 singularities). The supervisor's operating thresholds keep
#: normal runs far inside this band.
SOC_FLOOR = 0.005
SOC_CEILING = 0.995


@dataclass(frozen=True)
class BatteryParams:
    """Bank construction and model coefficients.

    ``c_10`` is the 10-hour rated capacity of one string [Ah]; the 10-hour
    current is ``c_10 / 10``. ``capacity_coeff`` is the printed 1.76 capacity
    factor (the classical fit uses 1.67). ``discharge_exp`` is the exponent of
    the discharge sag current term, 1.3 by default (1.8 is selectable).
    ``r_bat`` and ``e_b`` describe the Thevenin view of one cell; the fitted
    charge/discharge laws are the operative terminal-voltage model.
    """

    c_10: float = 100.0
    n_serial: int = 24
    n_parallel: int = 1
    r_bat: float = 0.002
    e_b: float = 2.0
    delta_t: float = 0.0
    capacity_coeff: float = 1.76
    discharge_exp: float = 1.3

    def __post_init__(self):
        if self.c_10 <= 0:
            raise DomainError("c_10 must be > 0")
        if self.n_serial < 1 or self.n_parallel < 1:
            raise DomainError("n_serial and n_parallel must be >= 1")
        if self.r_bat < 0:
            raise DomainError("r_bat must be >= 0")

    @property
    def i_10(self):
        """Current of the 10-hour discharge rate for one string [A]."""
        return self.c_10 / 10.0


@dataclass(frozen=True)
class BatteryState:
    """SOC, extracted charge and the last non-idle regime.

    ``q`` is the bank-level extracted charge [Ah]. ``mode_flag`` remembers the
    regime used to pick the open-circuit voltage branch at zero current.
    ``clamp_events`` counts SOC/charge clampings since the state was created.
    """

    soc: float = 1.0
    q: float = 0.0
    mode_flag: str = "idle"
    clamp_events: int = 0

    def __post_init__(self):
        if not 0.0 <= self.soc <= 1.0:
            raise DomainError("soc must lie in [0, 1]")
        if self.q < 0:
            raise DomainError("q must be >= 0")


def state_for_soc(soc, params, i_bat=0.0):
    """Initial state holding ``soc``, with ``q`` consistent with the capacity at ``i_bat``."""
    cap = bank_capacity(abs(i_bat), params)
    return BatteryState(soc=soc, q=(1.0 - soc) * cap, mode_flag="idle")


def capacity(i_bat, delta_t, params):
    """Available capacity of one string at discharge current ``i_bat`` [Ah].

    Maximal at rest (``capacity_coeff * c_10`` for ``delta_t`` = 0) and
    strictly decreasing in current.
    """
    if i_bat < 0:
        raise DomainError("capacity takes the discharge current magnitude, >= 0")
    return _kernels.capacity_ah(i_bat, delta_t, params.c_10, params.capacity_coeff)


def bank_capacity(i_bank, params, delta_t=None):
    """Bank capacity [Ah]: per-string capacity at the per-string share of ``i_bank``."""
    dt = params.delta_t if delta_t is None else delta_t
    return params.n_parallel * capacity(abs(i_bank) / params.n_parallel, dt, params)


def discharge_voltage(soc, i_bat, delta_t, params):
    """Terminal voltage of one string discharging at ``i_bat`` amps (magnitude) [V].

    Increasing in SOC, decreasing in current, proportional to the series cell
    count. Loaded evaluation is refused near the ``1/SOC^1.5`` singularity;
    at zero current only the affine open-circuit part remains, defined for
    any SOC.
    """
    if i_bat < 0:
        raise DomainError("discharge_voltage takes the current magnitude, >= 0")
    if soc <= SOC_FLOOR and i_bat > 0:
        raise SingularityGuardError(
            f"discharge voltage undefined at soc={soc:.4f} (floor {SOC_FLOOR})"
        )
    return _kernels.discharge_voltage(
        soc, i_bat, params.c_10, delta_t, params.n_serial, params.discharge_exp
    )


def charge_voltage(soc, i_bat, delta_t, params):
    """Terminal voltage of one string charging at ``i_bat`` amps (magnitude) [V].

    Increasing in SOC and in current, proportional to the series cell count.
    Loaded evaluation is refused near the ``1/(1-SOC)^1.2`` singularity; at
    zero current only the affine open-circuit part remains.
    """
    if i_bat < 0:
        raise DomainError("charge_voltage takes the current magnitude, >= 0")
    if soc >= SOC_CEILING and i_bat > 0:
        raise SingularityGuardError(
            f"charge voltage undefined at soc={soc:.4f} (ceiling {SOC_CEILING})"
        )
    return _kernels.charge_voltage(soc, i_bat, params.c_10, delta_t, params.n_serial)


def terminal_voltage(state, i_bat, params, delta_t=None):
    """Bank terminal voltage at signed bank current ``i_bat`` [V].

    Positive current dispatches to the discharge law, negative to the charge
    law (with the per-string magnitude); zero current returns the open-circuit
    branch of the last regime. The two branches deliberately differ at zero
    current: the gap is the model's charge/discharge hysteresis.
    """
    dt = params.delta_t if delta_t is None else delta_t
    i_str = abs(i_bat) / params.n_parallel
    if i_bat > 0:
        return discharge_voltage(state.soc, i_str, dt, params)
    if i_bat < 0:
        return charge_voltage(state.soc, i_str, dt, params)
    if state.mode_flag == "charging":
        return charge_voltage(state.soc, 0.0, dt, params)
    return discharge_voltage(state.soc, 0.0, dt, params)


def soc_update(state, i_bat, dt_h, params, delta_t=None):
    """Coulomb-counting update over ``dt_h`` hours at signed bank current ``i_bat``.

    Discharge (positive current) grows the extracted charge; charging shrinks
    it. Charge and SOC are clamped to their physical ranges and clampings are
    counted on the returned state.
    """
    if dt_h <= 0:
        raise DomainError("dt_h must be > 0")
    dt = params.delta_t if delta_t is None else delta_t
    clamps = state.clamp_events
    q = state.q + i_bat * dt_h
    if q < 0.0:
        q = 0.0
        clamps += 1
    cap = params.n_parallel * _kernels.capacity_ah(
        abs(i_bat) / params.n_parallel, dt, params.c_10, params.capacity_coeff
    )
    soc = 1.0 - q / cap
    if soc < 0.0:
        soc = 0.0
        clamps += 1
    elif soc > 1.0:
        soc = 1.0
        clamps += 1
    if i_bat > 0:
        flag = "discharging"
    elif i_bat < 0:
        flag = "charging"
    else:
        flag = state.mode_flag
    return replace(state, soc=soc, q=q, mode_flag=flag, clamp_events=clamps)


def current_for_power(p_bat, state, params, delta_t=None):
    """Bank current [A] delivering power ``p_bat`` (positive = discharge).

    Terminal voltage depends on current, so ``i = p / v(i)`` is iterated to
    ``|p - i*v(i)| <= 1e-9 * max(1, |p|)``. Raises the voltage-law guards for
    SOC outside the safe band and :class:`ConvergenceError` if the fixed point
    stalls.
    """
    dt = params.delta_t if delta_t is None else delta_t
    if p_bat == 0.0:
        return 0.0
    if p_bat > 0 and state.soc <= SOC_FLOOR:
        raise SingularityGuardError(
            f"cannot discharge at soc={state.soc:.4f} (floor {SOC_FLOOR})"
        )
    if p_bat < 0 and state.soc >= SOC_CEILING:
        raise SingularityGuardError(
            f"cannot charge at soc={state.soc:.4f} (ceiling {SOC_CEILING})"
        )
    i, residual, iters = _kernels.battery_current_for_power(
        p_bat,
        state.soc,
        params.c_10,
        dt,
        params.n_serial,
        params.n_parallel,
        params.discharge_exp,
    )
    if abs(residual) > 1e-9 * max(1.0, abs(p_bat)):
        raise ConvergenceError(
            f"battery current fixed point stalled at residual {residual:.3e} W",
            residual=residual,
            iterations=iters,
        )
    return i
