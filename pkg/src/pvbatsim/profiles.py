"""Environment and load time series: CSV ingestion, sampling, synthetic day.

CSV schema: UTF-8, comma separator, dot decimal, header ``time_s,<quantity>``
with quantity one of ``irradiance_wm2``, ``temperature_c``, ``load_w``.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass

from pvbatsim.errors import ConfigError, ProfileError

QUANTITIES = ("irradiance_wm2", "temperature_c", "load_w")

#: Quantities that must be non-negative.
_NON_NEGATIVE = ("irradiance_wm2", "load_w")


@dataclass(frozen=True)
class TimeSeriesProfile:
    """Sampled signal over time with an interpolation and boundary policy.

    ``interpolation`` is ``"step"`` (hold the previous knot, right-continuous)
    or ``"linear"``. ``boundary`` is ``"error"`` or ``"hold"`` (clamp to the
    end values outside the time range).
    """

    times: tuple
    values: tuple
    quantity: str
    interpolation: str = "linear"
    boundary: str = "hold"

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ProfileError(f"unknown quantity {self.quantity!r}, expected one of {QUANTITIES}")
        if self.interpolation not in ("step", "linear"):
            raise ProfileError(f"interpolation must be 'step' or 'linear', got {self.interpolation!r}")
        if self.boundary not in ("error", "hold"):
            raise ProfileError(f"boundary must be 'error' or 'hold', got {self.boundary!r}")
        if len(self.times) == 0:
            raise ProfileError("profile needs at least one sample")
        if len(self.times) != len(self.values):
            raise ProfileError("times and values must have the same length")
        for k, (t, v) in enumerate(zip(self.times, self.values)):
            if not (math.isfinite(t) and math.isfinite(v)):
                raise ProfileError(f"non-finite sample at index {k}")
            if self.quantity in _NON_NEGATIVE and v < 0:
                raise ProfileError(f"negative {self.quantity} value {v} at index {k}")
            if k > 0 and t <= self.times[k - 1]:
                raise ProfileError(f"timestamps must be strictly increasing at index {k}")

    @property
    def t_start(self):
        return self.times[0]

    @property
    def t_end(self):
        return self.times[-1]


def sample(profile, t):
    """Value of ``profile`` at time ``t`` [s] under its policies."""
    times = profile.times
    if t < times[0] or t > times[-1]:
        if profile.boundary == "error":
            raise ProfileError(
                f"t={t} outside profile range [{times[0]}, {times[-1]}]"
            )
        return profile.values[0] if t < times[0] else profile.values[-1]
    k = bisect_right(times, t) - 1
    if k == len(times) - 1:
        return profile.values[-1]
    if profile.interpolation == "step":
        return profile.values[k]
    t0, t1 = times[k], times[k + 1]
    v0, v1 = profile.values[k], profile.values[k + 1]
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0)


def load_csv(path, column, interpolation=None, boundary="hold"):
    """Read a two-column profile CSV with header ``time_s,<column>``.

    Validation failures (missing column, non-monotonic time, NaN, negative
    irradiance/load, unparseable rows) raise :class:`ProfileError` naming the
    offending row.
    """
    if interpolation is None:
        interpolation = "step" if column == "load_w" else "linear"
    times, values = [], []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        expected = f"time_s,{column}"
        if header != expected:
            raise ProfileError(f"{path}: expected header {expected!r}, got {header!r}")
        for row_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ProfileError(f"{path}: row {row_no}: expected 2 fields, got {len(parts)}")
            try:
                t, v = float(parts[0]), float(parts[1])
            except ValueError:
                raise ProfileError(f"{path}: row {row_no}: unparseable values {line!r}") from None
            if not (math.isfinite(t) and math.isfinite(v)):
                raise ProfileError(f"{path}: row {row_no}: non-finite value")
            if column in _NON_NEGATIVE and v < 0:
                raise ProfileError(f"{path}: row {row_no}: negative {column} value {v}")
            if times and t <= times[-1]:
                raise ProfileError(f"{path}: row {row_no}: non-monotonic timestamp {t}")
            times.append(t)
            values.append(v)
    if not times:
        raise ProfileError(f"{path}: no data rows")
    return TimeSeriesProfile(
        times=tuple(times), values=tuple(values), quantity=column,
        interpolation=interpolation, boundary=boundary,
    )


def write_csv(profile, path):
    """Write a profile back to the two-column CSV schema (bit-exact values)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"time_s,{profile.quantity}\n")
        for t, v in zip(profile.times, profile.values):
            fh.write(f"{t!r},{v!r}\n")


def synthetic_day(g_peak=1000.0, t_min=15.0, t_max=35.0, load_blocks=None,
                  sunrise_h=6.0, sunset_h=18.0, temp_lag_h=1.0, knot_s=60.0):
    """Synthesize one day: half-sine irradiance, lagged temperature, block load.

    Irradiance is a half sine between sunrise and sunset peaking at ``g_peak``
    and zero at night. Temperature follows the irradiance shape delayed by
    ``temp_lag_h`` hours, spanning [t_min, t_max]. The load is the sum of
    non-overlapping ``(start_h, end_h, watts)`` blocks. Returns the triple
    ``(irradiance, temperature, load)``.
    """
    if g_peak < 0:
        raise ConfigError("g_peak must be >= 0")
    if not sunrise_h < sunset_h:
        raise ConfigError("sunrise_h must be before sunset_h")
    if load_blocks is None:
        load_blocks = DEFAULT_LOAD_BLOCKS
    blocks = sorted((float(s), float(e), float(w)) for s, e, w in load_blocks)
    for (s0, e0, _), (s1, _, _) in zip(blocks, blocks[1:]):
        if s1 < e0:
            raise ConfigError(
                f"load blocks overlap: [{s0}, {e0}) and [{s1}, ...)"
            )
    day_s = 86400.0
    sunrise, sunset = sunrise_h * 3600.0, sunset_h * 3600.0
    daylight = sunset - sunrise

    def irr_shape(t, lag=0.0):
        x = (t - lag - sunrise) / daylight
        if x <= 0.0 or x >= 1.0:
            return 0.0
        return math.sin(math.pi * x)

    # temperature follows the normalized irradiance; a dark day has none
    temp_scale = 1.0 if g_peak > 0.0 else 0.0

    times = []
    g_values = []
    temp_values = []
    t = 0.0
    while t < day_s:
        times.append(t)
        g_values.append(g_peak * irr_shape(t))
        temp_values.append(t_min + (t_max - t_min) * temp_scale * irr_shape(t, lag=temp_lag_h * 3600.0))
        t += knot_s
    times.append(day_s)
    g_values.append(g_peak * irr_shape(day_s))
    temp_values.append(t_min + (t_max - t_min) * temp_scale * irr_shape(day_s, lag=temp_lag_h * 3600.0))

    irradiance = TimeSeriesProfile(tuple(times), tuple(g_values), "irradiance_wm2", "linear")
    temperature = TimeSeriesProfile(tuple(times), tuple(temp_values), "temperature_c", "linear")

    def load_at(t_h):
        for s, e, w in blocks:
            if s <= t_h < e:
                return w
        return 0.0

    edges = sorted({0.0, 24.0} | {s for s, _, _ in blocks} | {e for _, e, _ in blocks})
    load_times, load_values = [], []
    for h in edges:
        if h > 24.0:
            raise ConfigError(f"load block edge {h} beyond 24 h")
        load_times.append(h * 3600.0)
        load_values.append(load_at(h))
    load = TimeSeriesProfile(tuple(load_times), tuple(load_values), "load_w", "step")
    return irradiance, temperature, load


#: Illustrative daily consumption: morning and evening peaks over a small base.
DEFAULT_LOAD_BLOCKS = (
    (0.0, 6.0, 60.0),
    (6.0, 9.0, 150.0),
    (9.0, 18.0, 100.0),
    (18.0, 22.0, 300.0),
    (22.0, 24.0, 60.0),
)
