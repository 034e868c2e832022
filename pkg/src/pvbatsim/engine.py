"""Fixed-timestep simulation engine and the MPPT tracking bench.

Each step samples the environment, lets the due MPPT controller move the
duty cycle based on the previous measurement, solves the PV operating point
against the (lagged) bus voltage, asks the supervisor for a mode, routes
power, solves the battery current and updates the SOC. One record per step;
an energy ledger accumulates alongside and must close at the end.

Bus model: the DC bus is pinned to the battery terminal voltage whenever a
battery switch is closed (modes 1-3); in modes 4/5 it sits at the constant
nominal reference. The panel junction temperature is taken as the sampled
ambient value (no cell-thermal model). Record power columns are bus-side
(converter efficiency applied); the ledger's e_pv is array-side with the
converter loss in e_loss, so the closure identity holds for any efficiency.
"""

import math
from dataclasses import dataclass, replace

from pvbatsim import battery as bat
from pvbatsim import mppt as mp
from pvbatsim import pv
from pvbatsim import supervisor as sup
from pvbatsim.converter import pv_port_voltage
from pvbatsim.errors import (
    ConfigError,
    ConvergenceError,
    InvariantViolation,
    SingularityGuardError,
)
from pvbatsim.profiles import TimeSeriesProfile, sample
from pvbatsim.supervisor import SupervisorMode

#: Relative tolerance of the per-record power balance and the ledger closure.
BALANCE_TOL = 1e-6

#: clamp_flags bits.
FLAG_PV_CLAMP = 1      # blocking diode clamped a negative PV current
FLAG_SOC_CLAMP = 2     # coulomb counter hit an SOC/charge bound
FLAG_DUTY_LIMIT = 4    # duty cycle sits on a clamp bound
FLAG_PROTECTIVE = 8    # singularity guard downgraded the mode


@dataclass(frozen=True)
class SimConfig:
    """Everything one run needs. Build from YAML via :mod:`pvbatsim.config`."""

    panel: pv.PvPanelParams
    battery: bat.BatteryParams
    supervisor: sup.SupervisorConfig
    fuzzy: mp.FuzzyConfig
    irradiance: TimeSeriesProfile
    temperature: TimeSeriesProfile
    load: TimeSeriesProfile
    dt: float = 1.0
    t_end: float = 86400.0
    t_start: float = 0.0
    mppt_kind: str = "flc"
    d0: float = 0.4
    delta_d: float = 0.005
    t_mppt: float = 0.1
    d_max: float = 0.95
    eta: float = 1.0
    v_bus_nominal: float = None
    initial_soc: float = 0.8
    check_invariants: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")
        if self.t_end < self.dt:
            raise ConfigError("t_end must be >= dt")
        if self.mppt_kind not in ("po", "flc"):
            raise ConfigError(f"mppt_kind must be 'po' or 'flc', got {self.mppt_kind!r}")
        if not bat.SOC_FLOOR < self.initial_soc < bat.SOC_CEILING:
            raise ConfigError(
                f"initial_soc must lie in ({bat.SOC_FLOOR}, {bat.SOC_CEILING})"
            )
        if not 0.0 < self.eta <= 1.0:
            raise ConfigError("eta must lie in (0, 1]")
        if self.v_bus_nominal is None:
            object.__setattr__(self, "v_bus_nominal", 2.0 * self.battery.n_serial)

    @property
    def n_steps(self):
        return int(math.floor(self.t_end / self.dt + 1e-9))

    @property
    def mppt_every(self):
        """Controller period in engine steps (at least every step)."""
        return max(1, round(self.t_mppt / self.dt))


@dataclass(slots=True)
class SimRecord:
    """One output row; field order is the CSV column order."""

    t: float
    g: float
    t_amb: float
    p_pv: float
    p_load_requested: float
    p_load_served: float
    p_bat: float
    soc: float
    v_bat: float
    v_pv: float
    i_pv: float
    d: float
    mode: int
    k1: int
    k2: int
    k3: int
    p_curtailed: float
    clamp_flags: int


CSV_HEADER = (
    "t_s,g_wm2,t_amb_c,p_pv_w,p_load_requested_w,p_load_served_w,p_bat_w,"
    "soc,v_bat_v,v_pv_v,i_pv_a,d,mode,k1,k2,k3,p_curtailed_w,clamp_flags,controller"
)


@dataclass
class EnergyLedger:
    """Whole-run energy accounting [Wh]. ``e_pv`` is array-side harvest."""

    e_pv: float = 0.0
    e_load_served: float = 0.0
    e_load_unserved: float = 0.0
    e_bat_in: float = 0.0
    e_bat_out: float = 0.0
    e_curtailed: float = 0.0
    e_loss: float = 0.0

    def residual(self):
        """Signed closure error of e_pv + e_bat_out = e_served + e_bat_in + e_curtailed + e_loss."""
        return (self.e_pv + self.e_bat_out) - (
            self.e_load_served + self.e_bat_in + self.e_curtailed + self.e_loss
        )

    def relative_residual(self):
        return abs(self.residual()) / max(1.0, self.e_pv + self.e_bat_out)

    def closes(self, tol=BALANCE_TOL):
        return self.relative_residual() <= tol


@dataclass
class EngineState:
    """Mutable per-run state threaded through the steps."""

    bat: bat.BatteryState
    mppt: mp.MpptState
    sup: sup.SupervisorState
    v_bus: float
    p_meas: float = 0.0
    v_meas: float = 0.0
    have_meas: bool = False
    steps_since_mppt: int = 0


def init_state(config):
    battery_state = bat.state_for_soc(config.initial_soc, config.battery)
    mppt_state = mp.MpptState(d=config.d0, delta_d=config.delta_d, d_max=config.d_max)
    sup_state = sup.SupervisorState()
    v_bus = bat.terminal_voltage(battery_state, 0.0, config.battery)
    return EngineState(bat=battery_state, mppt=mppt_state, sup=sup_state, v_bus=v_bus)


def step(config, state, t, ledger=None, step_index=0):
    """Advance one engine step at time ``t``; returns the step's record.

    Solver failures abort with the step index attached; battery singularity
    guards downgrade to a protective mode (4 while charging, 5 while
    discharging) instead of aborting.
    """
    g = sample(config.irradiance, t)
    t_amb = sample(config.temperature, t)
    p_load = sample(config.load, t)
    t_j = t_amb + 273.15

    state.steps_since_mppt += 1
    if state.have_meas and state.steps_since_mppt >= config.mppt_every:
        if config.mppt_kind == "po":
            state.mppt = mp.po_step(state.p_meas, state.v_meas, state.mppt)
        else:
            state.mppt = mp.flc_step(state.p_meas, state.v_meas, state.mppt, config.fuzzy)
        state.steps_since_mppt = 0

    d = state.mppt.d
    flags = 0
    if d == 0.0 or d == state.mppt.d_max:
        flags |= FLAG_DUTY_LIMIT
    v_cand = pv_port_voltage(state.v_bus, d)
    try:
        point, pv_clamped = pv.operating_point(v_cand, g, t_j, config.panel)
    except ConvergenceError as exc:
        raise InvariantViolation(
            f"step {step_index} (t={t}): PV solve failed: {exc}"
        ) from exc
    if pv_clamped:
        flags |= FLAG_PV_CLAMP
    p_port = point.p_pv
    p_avail = config.eta * p_port
    state.p_meas = p_port
    state.v_meas = v_cand
    state.have_meas = True

    state.sup = sup.select_mode(p_avail, p_load, state.bat.soc, state.sup, config.supervisor)
    mode = state.sup.mode
    p_bat_set, p_served, p_curt, p_pv_used = sup.route_power(mode, p_avail, p_load)

    try:
        i_bat = (
            bat.current_for_power(p_bat_set, state.bat, config.battery)
            if p_bat_set != 0.0
            else 0.0
        )
    except SingularityGuardError:
        mode = SupervisorMode.MODE4 if p_bat_set < 0 else SupervisorMode.MODE5
        state.sup = replace(state.sup, mode=mode)
        p_bat_set, p_served, p_curt, p_pv_used = sup.route_power(mode, p_avail, p_load)
        i_bat = 0.0
        flags |= FLAG_PROTECTIVE
    except ConvergenceError as exc:
        raise InvariantViolation(
            f"step {step_index} (t={t}): battery solve failed: {exc}"
        ) from exc

    v_bat = bat.terminal_voltage(state.bat, i_bat, config.battery)
    p_bat = i_bat * v_bat
    before = state.bat.clamp_events
    state.bat = bat.soc_update(state.bat, i_bat, config.dt / 3600.0, config.battery)
    if state.bat.clamp_events > before:
        flags |= FLAG_SOC_CLAMP

    switches = sup.switch_states(mode)
    connected = switches.k1 or switches.k2
    state.v_bus = v_bat if (switches.k1 or switches.k3) else config.v_bus_nominal

    record = SimRecord(
        t=t,
        g=g,
        t_amb=t_amb,
        p_pv=p_pv_used,
        p_load_requested=p_load,
        p_load_served=p_served,
        p_bat=p_bat,
        soc=state.bat.soc,
        v_bat=v_bat,
        v_pv=v_cand if connected else 0.0,
        i_pv=point.i_pv if connected else 0.0,
        d=d,
        mode=int(mode),
        k1=int(switches.k1),
        k2=int(switches.k2),
        k3=int(switches.k3),
        p_curtailed=p_curt,
        clamp_flags=flags,
    )

    if ledger is not None:
        h = config.dt / 3600.0
        ledger.e_pv += (p_port if connected else 0.0) * h
        ledger.e_load_served += p_served * h
        ledger.e_load_unserved += (p_load - p_served) * h
        if p_bat > 0.0:
            ledger.e_bat_out += p_bat * h
        else:
            ledger.e_bat_in += -p_bat * h
        ledger.e_curtailed += p_curt * h
        ledger.e_loss += ((p_port - p_avail) if connected else 0.0) * h

    if config.check_invariants:
        _check_balance(record, step_index)
    return record


def _check_balance(rec, step_index):
    scale = max(1.0, rec.p_load_requested, rec.p_pv)
    mode = rec.mode
    if mode == 1:
        err = abs(rec.p_pv - (rec.p_load_served - rec.p_bat) - rec.p_curtailed)
    elif mode in (2, 3):
        err = abs(rec.p_load_served - (rec.p_pv + rec.p_bat))
    elif mode == 4:
        err = abs(rec.p_load_served - min(rec.p_pv, rec.p_load_requested)) + abs(rec.p_bat)
    else:
        err = abs(rec.p_load_served) + abs(rec.p_bat) + abs(rec.p_pv)
    if err > BALANCE_TOL * scale:
        raise InvariantViolation(
            f"step {step_index} (t={rec.t}): mode {mode} power balance off by {err:.3e} W"
        )


def run(config):
    """Run the configured simulation; returns ``(records, ledger)``.

    Deterministic: the record count is ``floor(t_end / dt)`` and identical
    configs produce identical records.
    """
    state = init_state(config)
    ledger = EnergyLedger()
    records = []
    for k in range(config.n_steps):
        t = config.t_start + k * config.dt
        records.append(step(config, state, t, ledger, k))
    return records, ledger


def records_to_csv(records, controller):
    """Render records as the canonical CSV text (trailing newline included)."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.t!r},{r.g!r},{r.t_amb!r},{r.p_pv!r},{r.p_load_requested!r},"
            f"{r.p_load_served!r},{r.p_bat!r},{r.soc!r},{r.v_bat!r},{r.v_pv!r},"
            f"{r.i_pv!r},{r.d!r},{r.mode},{r.k1},{r.k2},{r.k3},"
            f"{r.p_curtailed!r},{r.clamp_flags},{controller}"
        )
    return "\n".join(lines) + "\n"


def write_records_csv(records, controller, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(records_to_csv(records, controller))


def ledger_to_text(ledger):
    lines = ["quantity,value"]
    for name in (
        "e_pv", "e_load_served", "e_load_unserved", "e_bat_in",
        "e_bat_out", "e_curtailed", "e_loss",
    ):
        lines.append(f"{name}_wh,{getattr(ledger, name)!r}")
    lines.append(f"closure_residual_wh,{ledger.residual()!r}")
    lines.append(f"closure_relative,{ledger.relative_residual()!r}")
    return "\n".join(lines) + "\n"


def write_ledger(ledger, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ledger_to_text(ledger))


def run_tracking(kind, panel, g, t_c, n_steps, v_bus, d0=0.4, delta_d=0.005,
                 fuzzy=None, d_max=0.95, eta=1.0):
    """Desk-scale MPPT bench: one controller against a static curve.

    The bus is held at ``v_bus``; ``g`` (W/m2) and ``t_c`` (Celsius) may each
    be a constant or a sequence of per-step values. Returns a list of
    ``(d, v, p)`` samples, one per controller step.
    """
    if fuzzy is None:
        fuzzy = mp.FuzzyConfig()
    state = mp.MpptState(d=d0, delta_d=delta_d, d_max=d_max)
    g_seq = [g] * n_steps if isinstance(g, (int, float)) else list(g)
    t_seq = [t_c] * n_steps if isinstance(t_c, (int, float)) else list(t_c)
    if len(g_seq) != n_steps or len(t_seq) != n_steps:
        raise ConfigError("condition sequence length must equal n_steps")
    out = []
    for k in range(n_steps):
        v = pv_port_voltage(v_bus, state.d)
        point, _ = pv.operating_point(v, g_seq[k], t_seq[k] + 273.15, panel)
        p = eta * point.p_pv
        out.append((state.d, v, p))
        if kind == "po":
            state = mp.po_step(p, v, state)
        elif kind == "flc":
            state = mp.flc_step(p, v, state, fuzzy)
        else:
            raise ConfigError(f"unknown controller kind {kind!r}")
    return out


def steady_stats(samples, fraction=0.4):
    """Mean power and peak-to-peak power ripple over the trailing window."""
    n = len(samples)
    window = [p for _, _, p in samples[int(n * (1.0 - fraction)):]]
    mean = sum(window) / len(window)
    return mean, max(window) - min(window)
