"""Five-mode power management supervisor.

Routes power among PV array, battery bank and load through three switches:
K1 = PV-to-battery charging path, K2 = PV-to-load path, K3 = battery-to-load
path. Battery protection uses latched SOC hysteresis bands so a threshold
crossing causes at most one mode change.
"""

import enum
from dataclasses import dataclass, replace

from pvbatsim.errors import DomainError


class SupervisorMode(enum.IntEnum):
    MODE1 = 1  # PV feeds the load and recharges the battery
    MODE2 = 2  # PV insufficient, battery assists
    MODE3 = 3  # no usable PV, battery alone carries the load
    MODE4 = 4  # battery isolated (full or idle), PV serves the load directly
    MODE5 = 5  # battery depleted and PV absent/insufficient: load shed


@dataclass(frozen=True)
class SwitchStates:
    k1: bool = False
    k2: bool = False
    k3: bool = False


#: Mode -> (K1, K2, K3) switch table.
SWITCH_TABLE = {
    SupervisorMode.MODE1: SwitchStates(k1=True, k2=True, k3=False),
    SupervisorMode.MODE2: SwitchStates(k1=False, k2=True, k3=True),
    SupervisorMode.MODE3: SwitchStates(k1=False, k2=False, k3=True),
    SupervisorMode.MODE4: SwitchStates(k1=False, k2=True, k3=False),
    SupervisorMode.MODE5: SwitchStates(k1=False, k2=False, k3=False),
}


@dataclass(frozen=True)
class SupervisorConfig:
    """Protection thresholds. Release values de-latch the hysteresis bands."""

    soc_min: float = 0.20
    soc_min_release: float = 0.25
    soc_max: float = 0.90
    soc_max_release: float = 0.85
    p_epsilon: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.soc_min < self.soc_min_release < self.soc_max_release < self.soc_max < 1.0:
            raise DomainError(
                "thresholds must satisfy 0 < soc_min < soc_min_release "
                "< soc_max_release < soc_max < 1"
            )
        if self.p_epsilon <= 0:
            raise DomainError("p_epsilon must be > 0")


@dataclass(frozen=True)
class SupervisorState:
    """Threaded supervisor memory: previous mode plus the two protection latches.

    The latches cannot be reconstructed from the previous mode alone: a brief
    PV dip inside the hysteresis band would otherwise re-enable charging (or
    discharging) before the release threshold is reached.
    """

    mode: SupervisorMode = SupervisorMode.MODE4
    charge_blocked: bool = False
    discharge_blocked: bool = False


def update_latches(state, soc, config):
    """Set/clear the protection latches from the current SOC."""
    charge_blocked = state.charge_blocked
    if soc >= config.soc_max:
        charge_blocked = True
    elif soc <= config.soc_max_release:
        charge_blocked = False
    discharge_blocked = state.discharge_blocked
    if soc <= config.soc_min:
        discharge_blocked = True
    elif soc >= config.soc_min_release:
        discharge_blocked = False
    return replace(state, charge_blocked=charge_blocked, discharge_blocked=discharge_blocked)


def select_mode(p_pv, p_load, soc, state, config):
    """Pick the operating mode for the current power balance and SOC.

    Returns the new supervisor state carrying the selected mode. Protection
    outranks economics: a latched battery is never charged above the max band
    nor discharged below the min band. PV covering the load but with surplus
    below ``p_epsilon`` is served directly (MODE4) rather than cycling the
    charger on a negligible surplus.
    """
    if p_pv < 0 or p_load < 0:
        raise DomainError("p_pv and p_load must be >= 0")
    if not 0.0 <= soc <= 1.0:
        raise DomainError("soc must lie in [0, 1]")
    state = update_latches(state, soc, config)
    chargeable = not state.charge_blocked
    dischargeable = not state.discharge_blocked

    if p_pv >= p_load + config.p_epsilon and chargeable:
        mode = SupervisorMode.MODE1
    elif p_pv >= p_load:
        mode = SupervisorMode.MODE4
    elif p_pv >= config.p_epsilon and dischargeable:
        mode = SupervisorMode.MODE2
    elif p_pv < config.p_epsilon and dischargeable:
        mode = SupervisorMode.MODE3
    else:
        mode = SupervisorMode.MODE5
    return replace(state, mode=mode)


def switch_states(mode):
    """(K1, K2, K3) triple for ``mode``, exactly as tabulated."""
    return SWITCH_TABLE[mode]


def battery_power_setpoint(mode, p_pv, p_load):
    """Signed battery power implied by the mode (positive = discharge) [W]."""
    if mode is SupervisorMode.MODE1:
        return -(p_pv - p_load)
    if mode is SupervisorMode.MODE2:
        return p_load - p_pv
    if mode is SupervisorMode.MODE3:
        return p_load
    return 0.0


def route_power(mode, p_pv, p_load):
    """Full power routing for the mode: ``(p_bat, p_served, p_curtailed, p_pv_used)``.

    ``p_pv_used`` is the PV power actually entering the system: everything in
    modes 1/2/4 (with mode 4 curtailing the surplus beyond the load), nothing
    in modes 3/5 where both PV switches are open and the array idles at open
    circuit.
    """
    p_bat = battery_power_setpoint(mode, p_pv, p_load)
    if mode is SupervisorMode.MODE1 or mode is SupervisorMode.MODE2:
        return p_bat, p_load, 0.0, p_pv
    if mode is SupervisorMode.MODE3:
        return p_bat, p_load, 0.0, 0.0
    if mode is SupervisorMode.MODE4:
        served = p_pv if p_pv < p_load else p_load
        return 0.0, served, p_pv - served, p_pv
    return 0.0, 0.0, 0.0, 0.0
