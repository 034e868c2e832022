"""Maximum power point tracking: perturb & observe and a Mamdani fuzzy controller.

Both controllers emit duty-cycle commands for the boost stage. On that stage
the panel voltage is ``(1 - d) * v_bus``: raising the panel voltage means
LOWERING the duty cycle, which is why the default fuzzy output centers run
opposite to the label order (a "positive big" power-slope correction is a
negative duty increment).
"""

import enum
from dataclasses import dataclass, replace

from pvbatsim.converter import DEFAULT_D_MAX
from pvbatsim.errors import DomainError

#: Voltage difference below which the power slope is declared unmeasurable
#: and the error defaults to zero.
V_EPSILON = 1e-6


class FuzzyLabel(enum.IntEnum):
    NB = -2
    NS = -1
    Z = 0
    PS = 1
    PB = 2


#: 25-rule base, row = CE label, column = E label, entries as label ints.
#: The matrix is symmetric in (E, CE) and antisymmetric under sign negation;
#: both properties are asserted by tests against an independent transcription.
RULE_TABLE = (
    (-2, -2, -1, -1, 0),
    (-2, -1, -1, 0, 1),
    (-1, -1, 0, 1, 1),
    (-1, 0, 1, 1, 2),
    (0, 1, 1, 2, 2),
)


def rule_output(e_label, ce_label):
    """Consequent label for crisp antecedents (E, CE)."""
    return FuzzyLabel(RULE_TABLE[int(ce_label) + 2][int(e_label) + 2])


@dataclass(frozen=True)
class MpptState:
    """Controller memory shared by both algorithms."""

    p_prev: float = 0.0
    v_prev: float = 0.0
    e_prev: float = 0.0
    d: float = 0.4
    delta_d: float = 0.005
    direction: int = 1
    d_max: float = DEFAULT_D_MAX

    def __post_init__(self):
        if self.delta_d <= 0:
            raise DomainError("delta_d must be > 0")
        if not 0.0 <= self.d <= self.d_max:
            raise DomainError(f"duty cycle {self.d} outside [0, {self.d_max}]")
        if self.direction not in (-1, 1):
            raise DomainError("direction must be +1 or -1")


@dataclass(frozen=True)
class FuzzyConfig:
    """Universes and singleton centers of the fuzzy controller.

    Crisp E and CE are divided by ``e_range``/``ce_range`` before
    fuzzification, so the membership centers live on the normalized axis.
    ``out_centers`` are duty increments [per label NB..PB]; the defaults
    descend so that a positive power-slope label lowers the duty (boost
    topology, see module docstring).
    """

    e_range: float = 40.0
    ce_range: float = 40.0
    dd_range: float = 0.01
    e_centers: tuple = (-1.0, -0.5, 0.0, 0.5, 1.0)
    ce_centers: tuple = (-1.0, -0.5, 0.0, 0.5, 1.0)
    out_centers: tuple = None

    def __post_init__(self):
        if self.e_range <= 0 or self.ce_range <= 0 or self.dd_range <= 0:
            raise DomainError("fuzzy universe ranges must be > 0")
        if self.out_centers is None:
            dd = self.dd_range
            object.__setattr__(self, "out_centers", (dd, dd / 2, 0.0, -dd / 2, -dd))
        for name in ("e_centers", "ce_centers", "out_centers"):
            centers = getattr(self, name)
            if len(centers) != 5:
                raise DomainError(f"{name} must have exactly 5 entries")
            if centers[2] != 0.0:
                raise DomainError(f"{name}: the Z center must be 0")
            if any(centers[i] != -centers[4 - i] for i in range(5)):
                raise DomainError(f"{name} must be symmetric about 0")
        for name in ("e_centers", "ce_centers"):
            centers = getattr(self, name)
            if any(centers[i] >= centers[i + 1] for i in range(4)):
                raise DomainError(f"{name} must be strictly increasing")


def po_step(p_now, v_now, state):
    """One perturb & observe decision.

    Power rose since the last sample: keep perturbing the same way. Power
    fell: reverse. Unchanged power leaves the duty and direction alone.
    """
    dp = p_now - state.p_prev
    if dp == 0.0:
        return replace(state, p_prev=p_now, v_prev=v_now)
    direction = state.direction if dp > 0.0 else -state.direction
    d = state.d + direction * state.delta_d
    if d < 0.0:
        d = 0.0
    elif d > state.d_max:
        d = state.d_max
    return replace(state, p_prev=p_now, v_prev=v_now, d=d, direction=direction)


def compute_error_signals(p_now, p_prev, v_now, v_prev, e_prev):
    """Power slope E = dP/dV between samples, and its change CE.

    The slope is set to zero when the voltage moved less than ``V_EPSILON``
    (the quotient is undefined there and zero is the neutral action).
    """
    dv = v_now - v_prev
    if abs(dv) < V_EPSILON:
        e = 0.0
    else:
        e = (p_now - p_prev) / dv
    return e, e - e_prev


def fuzzify(x, centers):
    """Memberships of ``x`` in the five triangular sets centered at ``centers``.

    The triangles partition unity inside the universe and saturate at the
    outer labels beyond it.
    """
    mu = [0.0, 0.0, 0.0, 0.0, 0.0]
    if x <= centers[0]:
        mu[0] = 1.0
        return tuple(mu)
    if x >= centers[4]:
        mu[4] = 1.0
        return tuple(mu)
    for j in range(4):
        if x <= centers[j + 1]:
            t = (x - centers[j]) / (centers[j + 1] - centers[j])
            mu[j] = 1.0 - t
            mu[j + 1] = t
            break
    return tuple(mu)


def infer(mu_e, mu_ce):
    """Activations of the five output labels: min for AND, max to aggregate."""
    act = [0.0, 0.0, 0.0, 0.0, 0.0]
    for ic in range(5):
        mc = mu_ce[ic]
        if mc == 0.0:
            continue
        row = RULE_TABLE[ic]
        for ie in range(5):
            me = mu_e[ie]
            if me == 0.0:
                continue
            w = mc if mc < me else me
            k = row[ie] + 2
            if w > act[k]:
                act[k] = w
    return tuple(act)


def defuzzify(activations, centers):
    """Center of gravity over the singleton output centers; 0 when nothing fires."""
    total = sum(activations)
    if total == 0.0:
        return 0.0
    return sum(a * c for a, c in zip(activations, centers)) / total


def flc_step(p_now, v_now, state, config):
    """One fuzzy controller decision: error signals, rule base, duty update."""
    e, ce = compute_error_signals(p_now, state.p_prev, v_now, state.v_prev, state.e_prev)
    mu_e = fuzzify(e / config.e_range, config.e_centers)
    mu_ce = fuzzify(ce / config.ce_range, config.ce_centers)
    dd = defuzzify(infer(mu_e, mu_ce), config.out_centers)
    d = state.d + dd
    if d < 0.0:
        d = 0.0
    elif d > state.d_max:
        d = state.d_max
    return replace(state, p_prev=p_now, v_prev=v_now, e_prev=e, d=d)
