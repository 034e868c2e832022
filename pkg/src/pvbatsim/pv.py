"""Single-diode photovoltaic generator model.

The panel is the five-parameter equivalent circuit (photocurrent source,
diode, series and shunt resistance); the array composes identical panels in
series/parallel. The implicit current equation is solved by bracketed
bisection finished with safeguarded Newton, in the compiled kernel when
available.
"""

from dataclasses import dataclass, replace

from pvbatsim import _kernels
from pvbatsim.errors import ConvergenceError, DomainError

#: Residual tolerance of the implicit diode equation, per returned point [A].
RESIDUAL_TOL = 1e-9

#: Elementary charge [C] and Boltzmann constant [J/K] (2019 SI exact values).
ELEMENTARY_CHARGE = 1.602176634e-19
BOLTZMANN = 1.380649e-23


@dataclass(frozen=True)
class PvPanelParams:
    """Electrical parameters of one panel plus the array layout.

    Parameters
    ----------
    i_ph_ref : float
        Photocurrent at reference irradiance/temperature [A].
    i_0_ref : float
        Diode saturation current at reference temperature [A].
    r_s : float
        Series resistance [ohm].
    r_sh : float
        Shunt resistance [ohm].
    a : float
        Diode ideality factor, typically in [1, 2].
    n_s : int
        Cells in series within one panel.
    g_ref, t_ref : float
        Reference irradiance [W/m2] and cell temperature [K].
    k_i : float
        Fractional short-circuit temperature coefficient [1/K]; scales the
        photocurrent as ``1 + k_i * (t_j - t_ref)``.
    i_0_temp_exp : float
        Exponent of the optional ``(t_j / t_ref) ** exp`` saturation-current
        temperature law. 0 keeps ``i_0`` constant (the default closure).
    n_panels_series, n_panels_parallel : int
        Array layout.
    """

    i_ph_ref: float
    i_0_ref: float
    r_s: float
    r_sh: float
    a: float
    n_s: int
    g_ref: float = 1000.0
    t_ref: float = 298.15
    k_i: float = 0.0005
    i_0_temp_exp: float = 0.0
    n_panels_series: int = 1
    n_panels_parallel: int = 1
    q: float = ELEMENTARY_CHARGE
    k: float = BOLTZMANN

    def __post_init__(self):
        if self.i_ph_ref <= 0:
            raise DomainError("i_ph_ref must be > 0")
        if self.i_0_ref <= 0:
            raise DomainError("i_0_ref must be > 0")
        if self.r_s < 0:
            raise DomainError("r_s must be >= 0")
        if self.r_sh <= 0:
            raise DomainError("r_sh must be > 0")
        if not 1.0 <= self.a <= 2.0:
            raise DomainError("diode ideality factor a must lie in [1, 2]")
        if self.n_s < 1 or self.n_panels_series < 1 or self.n_panels_parallel < 1:
            raise DomainError("cell and panel counts must be >= 1")
        if self.g_ref <= 0:
            raise DomainError("g_ref must be > 0")

    def with_layout(self, n_series, n_parallel):
        """Same panel, different array layout."""
        return replace(self, n_panels_series=n_series, n_panels_parallel=n_parallel)

    def thermal_voltage(self, t_j):
        """Modified thermal voltage ``a * n_s * k * t_j / q`` of one panel [V]."""
        return self.a * self.n_s * self.k * t_j / self.q

    def saturation_current(self, t_j):
        """Diode saturation current at junction temperature ``t_j`` [A]."""
        if self.i_0_temp_exp == 0.0:
            return self.i_0_ref
        return self.i_0_ref * (t_j / self.t_ref) ** self.i_0_temp_exp


@dataclass(frozen=True)
class PvOperatingPoint:
    """One electrical operating point of the array."""

    v_pv: float
    i_pv: float
    p_pv: float
    g: float
    t_j: float


#: Generic 80 W / 36-cell panel used when no datasheet is configured.
#: At 1000 W/m2 and 25 C it yields Isc 4.95 A, Voc 21.7 V, Vmpp 17.7 V,
#: Pmpp 80.4 W.
GENERIC_80W = PvPanelParams(
    i_ph_ref=4.95,
    i_0_ref=7.0e-8,
    r_s=0.16,
    r_sh=200.0,
    a=1.3,
    n_s=36,
)


def _check_conditions(g, t_j):
    if g < 0:
        raise DomainError(f"irradiance must be >= 0, got {g}")
    if t_j <= 0:
        raise DomainError(f"junction temperature must be > 0 K, got {t_j}")


def photo_current(g, t_j, params):
    """Panel photocurrent at irradiance ``g`` [W/m2] and temperature ``t_j`` [K].

    Linear in irradiance with a fractional temperature correction:
    ``i_ph_ref * (g / g_ref) * (1 + k_i * (t_j - t_ref))``.
    """
    _check_conditions(g, t_j)
    return params.i_ph_ref * (g / params.g_ref) * (1.0 + params.k_i * (t_j - params.t_ref))


def solve_operating_current(v_pv, g, t_j, params):
    """Array current at array voltage ``v_pv`` from the implicit diode equation.

    The residual of the returned current satisfies ``|residual| <= 1e-9`` A at
    panel level. Raises :class:`ConvergenceError` if the solver cannot reach
    that tolerance, :class:`DomainError` for negative voltage or irradiance.
    """
    if v_pv < 0:
        raise DomainError(f"array voltage must be >= 0, got {v_pv}")
    _check_conditions(g, t_j)
    v_panel = v_pv / params.n_panels_series
    i_ph = photo_current(g, t_j, params)
    i_0 = params.saturation_current(t_j)
    vt = params.thermal_voltage(t_j)
    i_panel, residual, iters = _kernels.solve_diode_current(
        v_panel, i_ph, i_0, params.r_s, params.r_sh, vt
    )
    if abs(residual) > RESIDUAL_TOL:
        raise ConvergenceError(
            f"diode solve stalled at residual {residual:.3e} A after {iters} iterations",
            residual=residual,
            iterations=iters,
        )
    return i_panel * params.n_panels_parallel


def operating_point(v_pv, g, t_j, params):
    """Solve the array point at ``v_pv`` and apply the blocking-diode clamp.

    Returns ``(point, clamped)``. Voltages above open circuit would yield a
    negative current; the series blocking diode prevents reverse flow, so the
    current is clamped to zero and flagged.
    """
    i_pv = solve_operating_current(v_pv, g, t_j, params)
    clamped = i_pv < 0.0
    if clamped:
        i_pv = 0.0
    return PvOperatingPoint(v_pv=v_pv, i_pv=i_pv, p_pv=v_pv * i_pv, g=g, t_j=t_j), clamped


def open_circuit_voltage(g, t_j, params):
    """Array open-circuit voltage at the given conditions [V]."""
    _check_conditions(g, t_j)
    i_ph = photo_current(g, t_j, params)
    i_0 = params.saturation_current(t_j)
    vt = params.thermal_voltage(t_j)
    v_panel = _kernels.open_circuit_voltage(i_ph, i_0, params.r_sh, vt)
    return v_panel * params.n_panels_series


def iv_sweep(g, t_j, n_points, params):
    """Sweep ``n_points`` operating points at voltages evenly spaced on [0, Voc]."""
    if n_points < 2:
        raise DomainError("iv_sweep needs n_points >= 2")
    v_oc = open_circuit_voltage(g, t_j, params)
    step = v_oc / (n_points - 1)
    points = []
    for k in range(n_points):
        v = k * step
        i = solve_operating_current(v, g, t_j, params)
        points.append(PvOperatingPoint(v_pv=v, i_pv=i, p_pv=v * i, g=g, t_j=t_j))
    return points


_GOLDEN = 0.6180339887498949


def mpp_oracle(g, t_j, params, resolution=0.01):
    """Brute-force maximum power point: ``(v_mpp, p_mpp)``.

    Scans [0, Voc] at ``resolution`` volts per step, then refines the
    bracketing interval by golden-section search. Power is unimodal in
    voltage, so the refined maximum is global; the result is accurate to
    well under 0.01 % relative.
    """
    if resolution <= 0:
        raise DomainError("resolution must be > 0")
    _check_conditions(g, t_j)
    v_oc = open_circuit_voltage(g, t_j, params)
    if v_oc <= 0.0:
        return 0.0, 0.0

    def power(v):
        return v * solve_operating_current(v, g, t_j, params)

    n = max(2, int(v_oc / resolution) + 1)
    best_k, best_p = 0, 0.0
    step = v_oc / n
    for k in range(n + 1):
        p = power(k * step)
        if p > best_p:
            best_k, best_p = k, p
    lo = max(0.0, (best_k - 1) * step)
    hi = min(v_oc, (best_k + 1) * step)

    # golden-section pass on the unimodal bracket
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    p1, p2 = power(x1), power(x2)
    while hi - lo > 1e-10 * max(1.0, v_oc):
        if p1 < p2:
            lo, x1, p1 = x1, x2, p2
            x2 = lo + _GOLDEN * (hi - lo)
            p2 = power(x2)
        else:
            hi, x2, p2 = x2, x1, p1
            x1 = hi - _GOLDEN * (hi - lo)
            p1 = power(x1)
    v_mpp = 0.5 * (lo + hi)
    return v_mpp, max(power(v_mpp), best_p)
