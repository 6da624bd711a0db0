"""
Link budget - EIRP and the measured path loss it implies
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from errors import ParseError, UsageError
from propagation import Distance, DistanceLike, as_distance

logger = logging.getLogger(__name__)

RSRP_TYPICAL_RANGE_DBM = (-140.0, -40.0)


@dataclass(frozen=True)
class LinkBudget:
    """
    Transmit-side budget. Defaults are the usual LTE macro values:
    40 W (46 dBm), 18.15 dBi sector antenna, 0 dBi handset, 4.7 dB
    connector, 3 dB body and 3 dB combiner loss.
    """

    pt: float = 46.0      # dBm
    gt: float = 18.15     # dBi
    gr: float = 0.0       # dBi
    l_con: float = 4.7    # dB
    l_bo: float = 3.0     # dB
    l_co: float = 3.0     # dB

    def __post_init__(self):
        for name in ('pt', 'gt', 'gr', 'l_con', 'l_bo', 'l_co'):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise UsageError(f"link budget {name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        for name in ('l_con', 'l_bo', 'l_co'):
            if getattr(self, name) < 0:
                raise UsageError(f"link budget loss {name} must be >= 0")

    @property
    def eirp(self) -> float:
        return eirp(self)


def eirp(budget: LinkBudget) -> float:
    """Pt + Gt + Gr - Lcon - Lbo - Lco, in dBm at full precision"""
    return budget.pt + budget.gt + budget.gr - budget.l_con - budget.l_bo - budget.l_co


def measured_path_loss(eirp_dbm, rsrp_dbm):
    """EIRP - received power; works elementwise on arrays and Series"""
    return eirp_dbm - rsrp_dbm


def synthesize_rsrp(budget: LinkBudget, path_loss_db):
    """Received power a given loss would produce under this budget"""
    return budget.eirp - path_loss_db


@dataclass(frozen=True)
class RsrpSample:
    distance: Distance
    rsrp: float           # dBm
    site_id: str
    sector: int
    lat: Optional[float] = None
    lon: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'distance', as_distance(self.distance))
        if int(self.sector) != self.sector or self.sector not in (1, 2, 3):
            raise ParseError(f"sector out of range: {self.sector:g}")
        object.__setattr__(self, 'sector', int(self.sector))
        if not np.isfinite(self.rsrp):
            raise ParseError(f"rsrp must be finite, got {self.rsrp}")

    @property
    def rsrp_in_typical_range(self) -> bool:
        low, high = RSRP_TYPICAL_RANGE_DBM
        return low <= self.rsrp <= high


def sample(distance: DistanceLike, rsrp: float, site_id: str, sector: int) -> RsrpSample:
    """Shorthand used when building logs in code"""
    return RsrpSample(distance=as_distance(distance), rsrp=float(rsrp), site_id=site_id, sector=sector)
