"""
Empirical path-loss models - free space, Hata, COST-231, ECC-33, SUI and Ericsson

All functions are pure: they take immutable values and return a loss in dB.
Logarithms are base 10 throughout.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from errors import ModelDomainError, UsageError

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299792458.0  # m/s
DEFAULT_D0_M = 50.0
DEFAULT_HR_M = 1.5


def _require_positive(value: float, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ModelDomainError(f"{name} must be a number, got {value!r}")
    if not np.isfinite(value) or value <= 0:
        raise ModelDomainError(f"{name} must be positive and finite, got {value}")
    return value


@dataclass(frozen=True)
class Frequency:
    """Carrier frequency, stored in MHz"""

    mhz: float

    def __post_init__(self):
        object.__setattr__(self, 'mhz', _require_positive(self.mhz, 'frequency'))

    @classmethod
    def from_ghz(cls, ghz: float) -> 'Frequency':
        return cls(ghz * 1000.0)

    @property
    def ghz(self) -> float:
        return self.mhz / 1000.0

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / (self.mhz * 1e6)


@dataclass(frozen=True)
class Distance:
    """Transmitter-receiver distance, stored in meters"""

    m: float

    def __post_init__(self):
        object.__setattr__(self, 'm', _require_positive(self.m, 'distance'))

    @property
    def km(self) -> float:
        return self.m / 1000.0

    def ratio(self, reference_m: float) -> float:
        """Dimensionless d/d0"""
        return self.m / reference_m


FrequencyLike = Union[Frequency, float]
DistanceLike = Union[Distance, float]


def as_frequency(f: FrequencyLike) -> Frequency:
    """Accept a Frequency or a bare number of MHz"""
    return f if isinstance(f, Frequency) else Frequency(f)


def as_distance(d: DistanceLike) -> Distance:
    """Accept a Distance or a bare number of meters"""
    return d if isinstance(d, Distance) else Distance(d)


class EnvironmentClass(Enum):
    URBAN_LARGE_CITY = 'urban_large_city'
    URBAN_MEDIUM_SMALL_CITY = 'urban_medium_small_city'
    SUBURBAN = 'suburban'
    OPEN = 'open'

    @property
    def is_urban(self) -> bool:
        return self in (EnvironmentClass.URBAN_LARGE_CITY, EnvironmentClass.URBAN_MEDIUM_SMALL_CITY)

    @classmethod
    def parse(cls, name: str) -> 'EnvironmentClass':
        """Parse a config/CLI name; plain 'urban' means a large city"""
        key = str(name).strip().lower().replace('-', '_').replace(' ', '_')
        aliases = {
            'urban': cls.URBAN_LARGE_CITY,
            'large_city': cls.URBAN_LARGE_CITY,
            'medium_city': cls.URBAN_MEDIUM_SMALL_CITY,
            'small_city': cls.URBAN_MEDIUM_SMALL_CITY,
            'urban_medium_city': cls.URBAN_MEDIUM_SMALL_CITY,
            'rural': cls.OPEN,
        }
        if key in aliases:
            return aliases[key]
        for member in cls:
            if member.value == key:
                return member
        raise UsageError(f"unknown environment '{name}'")


class TerrainCategory(Enum):
    """SUI terrain categories with their (a, b, c) constants"""

    A = (4.6, 0.0075, 12.6)
    B = (4.0, 0.0065, 17.1)
    C = (3.6, 0.005, 20.0)

    @property
    def a(self) -> float:
        return self.value[0]

    @property
    def b(self) -> float:
        """1/m"""
        return self.value[1]

    @property
    def c(self) -> float:
        """m"""
        return self.value[2]

    @classmethod
    def for_environment(cls, env: EnvironmentClass) -> 'TerrainCategory':
        if env.is_urban:
            return cls.A
        if env is EnvironmentClass.SUBURBAN:
            return cls.B
        return cls.C

    @classmethod
    def parse(cls, name: str) -> 'TerrainCategory':
        key = str(name).strip().upper()
        if key in cls.__members__:
            return cls[key]
        raise UsageError(f"unknown terrain category '{name}'")


SHADOWING_RANGE_DB = (8.2, 10.6)


def default_shadowing(env: EnvironmentClass) -> float:
    return 10.6 if env.is_urban else 8.2


@dataclass(frozen=True)
class RadioContext:
    """Inputs shared by every model; terrain and s default from the environment"""

    f: Frequency
    hb: float
    hr: float = DEFAULT_HR_M
    env: EnvironmentClass = EnvironmentClass.URBAN_LARGE_CITY
    terrain: Optional[TerrainCategory] = None
    s: Optional[float] = None
    d0: float = DEFAULT_D0_M

    def __post_init__(self):
        object.__setattr__(self, 'f', as_frequency(self.f))
        hr = _require_positive(self.hr, 'receiver antenna height')
        hb = _require_positive(self.hb, 'base station antenna height')
        if hb <= hr:
            raise ModelDomainError(f"base station height {hb} m must exceed receiver height {hr} m")
        object.__setattr__(self, 'hr', hr)
        object.__setattr__(self, 'hb', hb)
        object.__setattr__(self, 'd0', _require_positive(self.d0, 'reference distance'))
        if self.terrain is None:
            object.__setattr__(self, 'terrain', TerrainCategory.for_environment(self.env))
        s = default_shadowing(self.env) if self.s is None else float(self.s)
        low, high = SHADOWING_RANGE_DB
        if not low <= s <= high:
            raise ModelDomainError(f"shadowing term {s} dB outside [{low}, {high}] dB")
        object.__setattr__(self, 's', s)


@dataclass(frozen=True)
class EricssonParams:
    a0: float
    a1: float
    a2: float
    a3: float

    @classmethod
    def for_environment(cls, env: EnvironmentClass) -> 'EricssonParams':
        if env.is_urban:
            return cls(36.2, 30.2, 12.0, 0.1)
        if env is EnvironmentClass.SUBURBAN:
            return cls(43.20, 68.93, 12.0, 0.1)
        # rural/open defaults of the Ericsson 9999 model
        return cls(45.95, 100.6, 12.0, 0.1)


class ModelId(Enum):
    """Declaration order is the tie-break order used when ranking"""

    FSPL = 'fspl'
    HATA = 'hata'
    COST231 = 'cost231'
    ECC33 = 'ecc33'
    SUI = 'sui'
    ERICSSON = 'ericsson'

    @property
    def order(self) -> int:
        return list(ModelId).index(self)

    @classmethod
    def parse(cls, name: str) -> 'ModelId':
        key = str(name).strip().lower().replace('-', '').replace('_', '')
        if key == 'ericson':
            key = 'ericsson'
        for member in cls:
            if member.value == key:
                return member
        raise UsageError(f"unknown model '{name}'")


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

def fspl(f: FrequencyLike, d: DistanceLike) -> float:
    """Free-space loss with d in km and f in MHz"""
    f, d = as_frequency(f), as_distance(d)
    return float(32.44 + 20.0 * np.log10(d.km) + 20.0 * np.log10(f.mhz))


def hata_mobile_correction(f: FrequencyLike, hr: float, env: EnvironmentClass) -> float:
    """
    Mobile antenna correction a(hr), shared by Hata and COST-231.

    Large cities use the 3.2/8.29 forms split at 300 MHz (300 itself takes
    the low-frequency branch); every other environment uses the
    medium/small-city form.
    """
    f = as_frequency(f)
    hr = _require_positive(hr, 'receiver antenna height')
    log_f = np.log10(f.mhz)
    if env is EnvironmentClass.URBAN_LARGE_CITY:
        if f.mhz > 300.0:
            return float(3.2 * np.log10(11.75 * hr) ** 2 - 4.97)
        return float(8.29 * np.log10(1.54 * hr) ** 2 - 1.1)
    return float((1.1 * log_f - 0.7) * hr - (1.56 * log_f - 0.8))


def hata(ctx: RadioContext, d: DistanceLike) -> float:
    d = as_distance(d)
    log_f = np.log10(ctx.f.mhz)
    log_hb = np.log10(ctx.hb)
    a_hr = hata_mobile_correction(ctx.f, ctx.hr, ctx.env)
    urban = 69.55 + 26.16 * log_f - 13.82 * log_hb - a_hr + (44.9 - 6.55 * log_hb) * np.log10(d.km)
    if ctx.env is EnvironmentClass.SUBURBAN:
        return float(urban - 2.0 * np.log10(ctx.f.mhz / 28.0) ** 2 - 5.4)
    if ctx.env is EnvironmentClass.OPEN:
        return float(urban - 4.78 * log_f ** 2 + 18.33 * log_f - 40.94)
    return float(urban)


def cost231(ctx: RadioContext, d: DistanceLike) -> float:
    d = as_distance(d)
    log_f = np.log10(ctx.f.mhz)
    log_hb = np.log10(ctx.hb)
    a_hr = hata_mobile_correction(ctx.f, ctx.hr, ctx.env)
    c_m = 3.0 if ctx.env.is_urban else 0.0
    return float(
        46.3 + 33.9 * log_f - 13.82 * log_hb - a_hr
        + (44.9 - 6.55 * log_hb) * np.log10(d.km) + c_m
    )


def ecc33_receiver_gain(f: FrequencyLike, hr: float, env: EnvironmentClass) -> float:
    """G_r; the linear form applies to large cities only"""
    f = as_frequency(f)
    hr = _require_positive(hr, 'receiver antenna height')
    if env is EnvironmentClass.URBAN_LARGE_CITY:
        return float(0.759 * hr - 1.862)
    return float((42.57 + 13.7 * np.log10(f.ghz)) * (np.log10(hr) - 0.585))


def ecc33(ctx: RadioContext, d: DistanceLike) -> float:
    """ECC-33 with f in GHz and d in km; hb = 200 m zeroes G_b"""
    d = as_distance(d)
    log_f = np.log10(ctx.f.ghz)
    log_d = np.log10(d.km)
    a_fs = 92.4 + 20.0 * log_d + 20.0 * log_f
    a_bm = 20.41 + 9.83 * log_d + 7.894 * log_f + 9.56 * log_f ** 2
    g_b = np.log10(ctx.hb / 200.0) * (13.958 + 5.8 * log_d ** 2)
    g_r = ecc33_receiver_gain(ctx.f, ctx.hr, ctx.env)
    return float(a_fs + a_bm - g_b - g_r)


def sui_intercept(ctx: RadioContext) -> float:
    """A = 20 log(4 pi d0 / wavelength)"""
    return float(20.0 * np.log10(4.0 * np.pi * ctx.d0 / ctx.f.wavelength_m))


def sui_exponent(ctx: RadioContext) -> float:
    """gamma = a - b hb + c / hb for the context's terrain"""
    t = ctx.terrain
    return t.a - t.b * ctx.hb + t.c / ctx.hb


def sui(ctx: RadioContext, d: DistanceLike) -> float:
    d = as_distance(d)
    if d.m < ctx.d0:
        raise ModelDomainError(
            f"sui: distance {d.m} m is below reference distance {ctx.d0} m", distance_m=d.m
        )
    return float(sui_intercept(ctx) + 10.0 * sui_exponent(ctx) * np.log10(d.ratio(ctx.d0)) + ctx.s)


def ericsson_frequency_term(f: FrequencyLike) -> float:
    """g(f) = 44.49 log f - 4.78 (log f)^2, f in MHz"""
    log_f = np.log10(as_frequency(f).mhz)
    return float(44.49 * log_f - 4.78 * log_f ** 2)


def ericsson(ctx: RadioContext, params: Optional[EricssonParams], d: DistanceLike) -> float:
    d = as_distance(d)
    p = params or EricssonParams.for_environment(ctx.env)
    log_d = np.log10(d.km)
    log_hb = np.log10(ctx.hb)
    return float(
        p.a0 + p.a1 * log_d + p.a2 * log_hb + p.a3 * log_hb * log_d
        - 3.2 * np.log10(11.75 * ctx.hr) ** 2
        + ericsson_frequency_term(ctx.f)
    )


_MODELS: Dict[ModelId, Callable[[RadioContext, Distance, Optional[EricssonParams]], float]] = {
    ModelId.FSPL: lambda ctx, d, params: fspl(ctx.f, d),
    ModelId.HATA: lambda ctx, d, params: hata(ctx, d),
    ModelId.COST231: lambda ctx, d, params: cost231(ctx, d),
    ModelId.ECC33: lambda ctx, d, params: ecc33(ctx, d),
    ModelId.SUI: lambda ctx, d, params: sui(ctx, d),
    ModelId.ERICSSON: lambda ctx, d, params: ericsson(ctx, params, d),
}


def predict(model_id: ModelId, ctx: RadioContext, d: DistanceLike,
            params: Optional[EricssonParams] = None) -> float:
    """Dispatch to one model; params only matter for Ericsson"""
    return _MODELS[model_id](ctx, as_distance(d), params)


def model_warnings(model_id: ModelId, ctx: RadioContext) -> List[str]:
    """Validity-range notes for a model in this context; never fatal"""
    notes = []
    f_mhz = ctx.f.mhz
    if model_id is ModelId.SUI:
        if f_mhz >= 2000.0:
            notes.append(f"sui: frequency {f_mhz:g} MHz is outside the f < 2 GHz validity range")
        if not 10.0 < ctx.hb < 80.0:
            notes.append(f"sui: base station height {ctx.hb:g} m is outside (10, 80) m")
    elif model_id is ModelId.HATA and not 150.0 <= f_mhz <= 1500.0:
        notes.append(f"hata: frequency {f_mhz:g} MHz is outside [150, 1500] MHz")
    elif model_id is ModelId.COST231 and not 1500.0 <= f_mhz <= 2000.0:
        notes.append(f"cost231: frequency {f_mhz:g} MHz is outside [1500, 2000] MHz")
    return notes


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathLossCurve:
    """
    Predicted loss over a distance sweep.

    A non-zero offset_db makes this the curve of a calibrated model: every
    point is the base model plus the offset.
    """

    model_id: ModelId
    points: Tuple[Tuple[float, float], ...]
    offset_db: float = 0.0
    warnings: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        distances = [d for d, _ in self.points]
        if any(b <= a for a, b in zip(distances, distances[1:])):
            raise ModelDomainError("curve distances must be strictly increasing")
        if not all(np.isfinite(loss) for _, loss in self.points):
            raise ModelDomainError("curve contains a non-finite loss")

    @property
    def distances_m(self) -> List[float]:
        return [d for d, _ in self.points]

    @property
    def losses_db(self) -> List[float]:
        return [loss for _, loss in self.points]

    @property
    def label(self) -> str:
        if self.offset_db == 0.0:
            return self.model_id.value
        return f"calibrated({self.model_id.value}, {self.offset_db:+.4f} dB)"


def sweep_distances(d_min: DistanceLike, d_max: DistanceLike, step: DistanceLike) -> List[float]:
    """d_min, d_min + step, ... up to and including d_max"""
    lo, hi = as_distance(d_min).m, as_distance(d_max).m
    try:
        step_m = as_distance(step).m
    except ModelDomainError as e:
        raise UsageError(f"sweep step must be positive: {e}")
    if lo > hi:
        raise UsageError(f"sweep start {lo} m exceeds end {hi} m")
    count = int(np.floor((hi - lo) / step_m + 1e-9)) + 1
    return [lo + k * step_m for k in range(count)]


def sweep(model_id: ModelId, ctx: RadioContext, params: Optional[EricssonParams] = None,
          d_min: DistanceLike = DEFAULT_D0_M, d_max: DistanceLike = 500.0,
          step: DistanceLike = 50.0, offset_db: float = 0.0) -> PathLossCurve:
    """Sample a model over a distance range"""
    points = []
    for d_m in sweep_distances(d_min, d_max, step):
        try:
            loss = predict(model_id, ctx, d_m, params)
        except ModelDomainError as e:
            raise ModelDomainError(f"{model_id.value} at {d_m:g} m: {e}", distance_m=d_m) from e
        points.append((d_m, loss + offset_db))

    notes = model_warnings(model_id, ctx)
    for note in notes:
        logger.warning(note)
    logger.debug(f"Swept {model_id.value} over {len(points)} points")
    return PathLossCurve(model_id=model_id, points=tuple(points), offset_db=offset_db, warnings=tuple(notes))
