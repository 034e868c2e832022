"""YAML configuration: schema, defaults, validation with key-level messages.

One structured file drives a run; every section mirrors a module config.
Unknown keys are rejected so typos fail loudly instead of silently using a
default.
"""

import copy

import yaml

from pvbatsim import battery as bat
from pvbatsim import mppt as mp
from pvbatsim import pv
from pvbatsim import supervisor as sup
from pvbatsim.engine import SimConfig
from pvbatsim.errors import ConfigError
from pvbatsim.profiles import DEFAULT_LOAD_BLOCKS, load_csv, synthetic_day

#: Panel presets selectable as ``panel.preset``.
PANEL_PRESETS = {"generic_80w": pv.GENERIC_80W}

_DEFAULTS = {
    "simulation": {
        "dt_s": 1.0,
        "t_end_s": 86400.0,
        "mppt": "flc",
        "initial_soc": 0.8,
        "v_bus_nominal_v": None,
    },
    "panel": {
        "preset": "generic_80w",
        "n_panels_series": 2,
        "n_panels_parallel": 2,
    },
    "battery": {
        "c_10_ah": 100.0,
        "n_serial": 24,
        "n_parallel": 1,
        "r_bat_ohm": 0.002,
        "e_b_v": 2.0,
        "delta_t_c": 0.0,
        "capacity_coeff": 1.76,
        "discharge_exp": 1.3,
    },
    "converter": {
        "d_max": 0.95,
        "eta": 1.0,
    },
    "mppt": {
        "delta_d": 0.005,
        "t_mppt_s": 0.1,
        "d0": 0.4,
        "fuzzy": {
            "e_range": 40.0,
            "ce_range": 40.0,
            "dd_range": 0.01,
        },
    },
    "supervisor": {
        "soc_min": 0.20,
        "soc_min_release": 0.25,
        "soc_max": 0.90,
        "soc_max_release": 0.85,
        "p_epsilon_w": 1.0,
    },
    "profiles": {
        "synthetic": {
            "g_peak_wm2": 1000.0,
            "t_min_c": 15.0,
            "t_max_c": 35.0,
            "sunrise_h": 6.0,
            "sunset_h": 18.0,
            "temp_lag_h": 1.0,
            "load_blocks": [list(b) for b in DEFAULT_LOAD_BLOCKS],
        },
    },
}

#: PvPanelParams fields that may override a preset under ``panel:``.
_PANEL_FIELDS = (
    "i_ph_ref", "i_0_ref", "r_s", "r_sh", "a", "n_s", "g_ref", "t_ref",
    "k_i", "i_0_temp_exp", "n_panels_series", "n_panels_parallel",
)


def default_config():
    """Deep copy of the built-in default configuration dict."""
    return copy.deepcopy(_DEFAULTS)


def load_config_file(path):
    """Parse a YAML config file into a plain dict (no validation yet)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse error: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


# sections whose keys are validated downstream, not against the defaults dict
_FREE_FORM = ("profiles", "panel")


def _merge(base, override, path=""):
    """Merge override into the defaults, refusing keys the schema lacks."""
    merged = {}
    for key, default_value in base.items():
        if key in override:
            value = override[key]
            if isinstance(default_value, dict) and key not in _FREE_FORM:
                if not isinstance(value, dict):
                    raise ConfigError(f"{path}{key} must be a mapping")
                merged[key] = _merge(default_value, value, f"{path}{key}.")
            elif key == "panel":
                if not isinstance(value, dict):
                    raise ConfigError("panel must be a mapping")
                merged[key] = {**copy.deepcopy(default_value), **value}
            else:
                merged[key] = value
        else:
            merged[key] = copy.deepcopy(default_value)
    for key in override:
        if key not in base:
            raise ConfigError(f"unknown config key '{path}{key}'")
    return merged


def _number(section, key, value, minimum=None, maximum=None,
            exclusive_min=False, exclusive_max=False):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    v = float(value)
    if minimum is not None and (v <= minimum if exclusive_min else v < minimum):
        raise ConfigError(f"{section}.{key} must be {'>' if exclusive_min else '>='} {minimum}")
    if maximum is not None and (v >= maximum if exclusive_max else v > maximum):
        raise ConfigError(f"{section}.{key} must be {'<' if exclusive_max else '<='} {maximum}")
    return v


def _build_panel(section):
    preset_name = section.get("preset", "generic_80w")
    if preset_name not in PANEL_PRESETS:
        raise ConfigError(
            f"panel.preset {preset_name!r} unknown; available: {sorted(PANEL_PRESETS)}"
        )
    overrides = {}
    for key, value in section.items():
        if key == "preset":
            continue
        if key not in _PANEL_FIELDS:
            raise ConfigError(f"unknown config key 'panel.{key}'")
        if key in ("n_s", "n_panels_series", "n_panels_parallel"):
            overrides[key] = int(_number("panel", key, value, minimum=1))
        else:
            overrides[key] = _number("panel", key, value)
    base = PANEL_PRESETS[preset_name]
    try:
        return pv.PvPanelParams(**{**_panel_as_dict(base), **overrides})
    except ValueError as exc:
        raise ConfigError(f"panel: {exc}") from exc


def _panel_as_dict(params):
    return {name: getattr(params, name) for name in _PANEL_FIELDS}


def _build_profiles(section):
    if "synthetic" in section and len(section) == 1:
        syn = section["synthetic"]
        known = {"g_peak_wm2", "t_min_c", "t_max_c", "sunrise_h", "sunset_h",
                 "temp_lag_h", "load_blocks"}
        for key in syn:
            if key not in known:
                raise ConfigError(f"unknown config key 'profiles.synthetic.{key}'")
        blocks = syn.get("load_blocks", [list(b) for b in DEFAULT_LOAD_BLOCKS])
        for i, block in enumerate(blocks):
            if len(block) != 3:
                raise ConfigError(
                    f"profiles.synthetic.load_blocks[{i}] must be [start_h, end_h, watts]"
                )
        try:
            return synthetic_day(
                g_peak=syn.get("g_peak_wm2", 1000.0),
                t_min=syn.get("t_min_c", 15.0),
                t_max=syn.get("t_max_c", 35.0),
                load_blocks=blocks,
                sunrise_h=syn.get("sunrise_h", 6.0),
                sunset_h=syn.get("sunset_h", 18.0),
                temp_lag_h=syn.get("temp_lag_h", 1.0),
            )
        except ValueError as exc:
            raise ConfigError(f"profiles.synthetic: {exc}") from exc
    if {"irradiance", "temperature", "load"} <= set(section):
        for key in section:
            if key not in ("irradiance", "temperature", "load"):
                raise ConfigError(f"unknown config key 'profiles.{key}'")
        column = {"irradiance": "irradiance_wm2", "temperature": "temperature_c",
                  "load": "load_w"}
        out = []
        for name in ("irradiance", "temperature", "load"):
            entry = section[name]
            if not isinstance(entry, dict) or "csv" not in entry:
                raise ConfigError(f"profiles.{name} must be a mapping with a 'csv' path")
            out.append(load_csv(entry["csv"], column[name]))
        return tuple(out)
    raise ConfigError(
        "profiles must be either {synthetic: {...}} or per-signal "
        "{irradiance: {csv: ...}, temperature: {csv: ...}, load: {csv: ...}}"
    )


def build_sim_config(data=None, mppt_override=None):
    """Validate a config dict (merged over the defaults) into a SimConfig."""
    merged = _merge(_DEFAULTS, data or {})

    sim = merged["simulation"]
    dt = _number("simulation", "dt_s", sim["dt_s"], minimum=0, exclusive_min=True)
    t_end = _number("simulation", "t_end_s", sim["t_end_s"], minimum=dt)
    mppt_kind = mppt_override or sim["mppt"]
    if mppt_kind not in ("po", "flc"):
        raise ConfigError(f"simulation.mppt must be 'po' or 'flc', got {mppt_kind!r}")
    initial_soc = _number("simulation", "initial_soc", sim["initial_soc"],
                          minimum=bat.SOC_FLOOR, maximum=bat.SOC_CEILING,
                          exclusive_min=True, exclusive_max=True)
    v_bus_nominal = sim["v_bus_nominal_v"]
    if v_bus_nominal is not None:
        v_bus_nominal = _number("simulation", "v_bus_nominal_v", v_bus_nominal,
                                minimum=0, exclusive_min=True)

    panel = _build_panel(merged["panel"])

    b = merged["battery"]
    try:
        battery = bat.BatteryParams(
            c_10=_number("battery", "c_10_ah", b["c_10_ah"], minimum=0, exclusive_min=True),
            n_serial=int(_number("battery", "n_serial", b["n_serial"], minimum=1)),
            n_parallel=int(_number("battery", "n_parallel", b["n_parallel"], minimum=1)),
            r_bat=_number("battery", "r_bat_ohm", b["r_bat_ohm"], minimum=0),
            e_b=_number("battery", "e_b_v", b["e_b_v"]),
            delta_t=_number("battery", "delta_t_c", b["delta_t_c"]),
            capacity_coeff=_number("battery", "capacity_coeff", b["capacity_coeff"],
                                   minimum=0, exclusive_min=True),
            discharge_exp=_number("battery", "discharge_exp", b["discharge_exp"],
                                  minimum=0, exclusive_min=True),
        )
    except ValueError as exc:
        raise ConfigError(f"battery: {exc}") from exc

    conv = merged["converter"]
    d_max = _number("converter", "d_max", conv["d_max"], minimum=0, maximum=1,
                    exclusive_max=True)
    eta = _number("converter", "eta", conv["eta"], minimum=0, maximum=1,
                  exclusive_min=True)

    m = merged["mppt"]
    delta_d = _number("mppt", "delta_d", m["delta_d"], minimum=0, exclusive_min=True)
    t_mppt = _number("mppt", "t_mppt_s", m["t_mppt_s"], minimum=0, exclusive_min=True)
    d0 = _number("mppt", "d0", m["d0"], minimum=0, maximum=d_max)
    f = m["fuzzy"]
    try:
        fuzzy = mp.FuzzyConfig(
            e_range=_number("mppt.fuzzy", "e_range", f["e_range"], minimum=0, exclusive_min=True),
            ce_range=_number("mppt.fuzzy", "ce_range", f["ce_range"], minimum=0, exclusive_min=True),
            dd_range=_number("mppt.fuzzy", "dd_range", f["dd_range"], minimum=0, exclusive_min=True),
        )
    except ValueError as exc:
        raise ConfigError(f"mppt.fuzzy: {exc}") from exc

    s = merged["supervisor"]
    soc_min = _number("supervisor", "soc_min", s["soc_min"])
    soc_max = _number("supervisor", "soc_max", s["soc_max"])
    if soc_min >= soc_max:
        raise ConfigError(
            f"supervisor.soc_min ({soc_min}) must be below supervisor.soc_max ({soc_max})"
        )
    try:
        supervisor = sup.SupervisorConfig(
            soc_min=soc_min,
            soc_min_release=_number("supervisor", "soc_min_release", s["soc_min_release"]),
            soc_max=soc_max,
            soc_max_release=_number("supervisor", "soc_max_release", s["soc_max_release"]),
            p_epsilon=_number("supervisor", "p_epsilon_w", s["p_epsilon_w"],
                              minimum=0, exclusive_min=True),
        )
    except ValueError as exc:
        raise ConfigError(f"supervisor: {exc}") from exc

    irradiance, temperature, load = _build_profiles(merged["profiles"])

    try:
        return SimConfig(
            panel=panel,
            battery=battery,
            supervisor=supervisor,
            fuzzy=fuzzy,
            irradiance=irradiance,
            temperature=temperature,
            load=load,
            dt=dt,
            t_end=t_end,
            mppt_kind=mppt_kind,
            d0=d0,
            delta_d=delta_d,
            t_mppt=t_mppt,
            d_max=d_max,
            eta=eta,
            v_bus_nominal=v_bus_nominal,
            initial_soc=initial_soc,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
