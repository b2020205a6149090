"""Level-1 (square-law) MOSFET evaluation.

Drain current, operating region and analytic small-signal conductances
for both polarities. The current coefficient convention is
K = (kp/2)*(w/l), so a saturated device carries K*Vov^2*(1+lambda*Vds).
Body effect is ignored; bulks are assumed tied to the source rail.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ModelError


class MosPolarity(enum.Enum):
    N = "nmos"
    P = "pmos"


class Region(enum.Enum):
    CUTOFF = "cutoff"
    TRIODE = "triode"
    SATURATION = "saturation"


@dataclass(frozen=True)
class MosModel:
    """Process-level model card."""

    polarity: MosPolarity
    kp: float           # transconductance parameter mu*Cox [A/V^2]
    vto: float          # threshold voltage [V], <= 0 for P devices
    lam: float = 0.0    # channel-length modulation [1/V]
    cgs: float = 0.0    # fixed gate-source capacitance [F]
    cgd: float = 0.0    # fixed gate-drain capacitance [F]

    def __post_init__(self):
        if self.kp <= 0.0:
            raise ModelError(f"kp must be > 0, got {self.kp}")
        if self.polarity is MosPolarity.N and self.vto < 0.0:
            raise ModelError(f"N-device vto must be >= 0, got {self.vto}")
        if self.polarity is MosPolarity.P and self.vto > 0.0:
            raise ModelError(f"P-device vto must be <= 0, got {self.vto}")
        if self.lam < 0.0:
            raise ModelError(f"lambda must be >= 0, got {self.lam}")
        if self.cgs < 0.0 or self.cgd < 0.0:
            raise ModelError("capacitances must be >= 0")


@dataclass(frozen=True)
class MosGeometry:
    w: float  # channel width [m]
    l: float  # channel length [m]

    def __post_init__(self):
        if self.w <= 0.0 or self.l <= 0.0:
            raise ModelError(f"w and l must be > 0, got w={self.w} l={self.l}")


@dataclass(frozen=True)
class DeviceEval:
    """Operating data at one bias point.

    ``id`` is the current flowing into the drain terminal, so a
    conducting P device reports a negative value. ``gm`` and ``gds``
    are the analytic partials of ``id`` w.r.t. vgs and vds on the
    returned branch.
    """

    id: float      # drain current [A]
    gm: float      # d id / d vgs [S]
    gds: float     # d id / d vds [S]
    region: Region


# representative 180 nm level-1 cards; lambda nonzero for realism,
# replace with lam=0 when cross-checking against the closed forms
NMOS_DEFAULT = MosModel(MosPolarity.N, kp=170e-6, vto=0.5, lam=0.05)
PMOS_DEFAULT = MosModel(MosPolarity.P, kp=60e-6, vto=-0.5, lam=0.05)


def kfactor(model: MosModel, geom: MosGeometry) -> float:
    """Square-law current coefficient K = (kp/2)*(w/l) [A/V^2]."""
    return 0.5 * model.kp * geom.w / geom.l


def _eval_fwd(k: float, vov: float, vds: float, lam: float):
    # N-type normalized branch evaluation, vds >= 0.
    # Returns (id, d id/d vgs, d id/d vds, region).
    if vov <= 0.0:
        return 0.0, 0.0, 0.0, Region.CUTOFF
    cm = 1.0 + lam * vds
    if vds >= vov:
        base = k * vov * vov
        return base * cm, 2.0 * k * vov * cm, base * lam, Region.SATURATION
    base = k * (2.0 * vov - vds) * vds
    gm = 2.0 * k * vds * cm
    gds = k * ((2.0 * vov - 2.0 * vds) * cm + (2.0 * vov - vds) * vds * lam)
    return base * cm, gm, gds, Region.TRIODE


def _eval_n(k: float, vgs: float, vds: float, vto: float, lam: float):
    if vds >= 0.0:
        return _eval_fwd(k, vgs - vto, vds, lam)
    # reversed conduction: source and drain swap roles
    ia, ga, gb, region = _eval_fwd(k, vgs - vds - vto, -vds, lam)
    return -ia, -ga, ga + gb, region


def mos_eval(model: MosModel, geom: MosGeometry, vgs: float, vds: float) -> DeviceEval:
    """Evaluate one device at the bias (vgs, vds), source-referenced.

    Total function: every real (vgs, vds) maps to a branch. P devices
    are evaluated by polarity mirroring of the N equations.
    """
    k = kfactor(model, geom)
    if model.polarity is MosPolarity.P:
        i, gm, gds, region = _eval_n(k, -vgs, -vds, -model.vto, model.lam)
        return DeviceEval(id=-i, gm=gm, gds=gds, region=region)
    i, gm, gds, region = _eval_n(k, vgs, vds, model.vto, model.lam)
    return DeviceEval(id=i, gm=gm, gds=gds, region=region)


def mos_charge_caps(model: MosModel) -> tuple[float, float]:
    """Fixed (cgs, cgd) used by the transient companion models."""
    return model.cgs, model.cgd
