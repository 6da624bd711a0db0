"""
Drive-test ingestion - CSV parsing, sector averaging, distance binning

Turns RSRP logs into MeasurementSets of measured path loss.
"""

import io
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from calibration import MeasurementSet
from errors import DegenerateDataError, ModelDomainError, ParseError, UsageError
from link_budget import LinkBudget, RsrpSample, measured_path_loss, sample, synthesize_rsrp
from propagation import (
    Distance,
    DistanceLike,
    EnvironmentClass,
    EricssonParams,
    Frequency,
    ModelId,
    RadioContext,
    as_distance,
    predict,
    sweep_distances,
)

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ('site_id', 'sector', 'distance_m', 'rsrp_dbm')
OPTIONAL_COLUMNS = ('lat', 'lon')
EXPECTED_FREQUENCIES_MHZ = (800.0, 2600.0)


@dataclass(frozen=True)
class DriveTestLog:
    rows: Tuple[RsrpSample, ...]
    site_id: str
    frequency: Optional[Frequency] = None
    hb: Optional[float] = None
    env: Optional[EnvironmentClass] = None
    warnings: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.rows:
            raise UsageError("no samples")
        sites = sorted({row.site_id for row in self.rows})
        if sites != [self.site_id]:
            raise ParseError(f"log mixes sites {', '.join(sites)}; expected only {self.site_id}")

    def __len__(self) -> int:
        return len(self.rows)

    def with_metadata(self, frequency: Frequency, hb: float, env: EnvironmentClass) -> 'DriveTestLog':
        notes = list(self.warnings)
        if frequency.mhz not in EXPECTED_FREQUENCIES_MHZ:
            note = f"{self.site_id}: frequency {frequency.mhz:g} MHz is neither 800 nor 2600 MHz"
            logger.warning(note)
            notes.append(note)
        return replace(self, frequency=frequency, hb=float(hb), env=env, warnings=tuple(notes))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'site_id': [r.site_id for r in self.rows],
            'sector': [r.sector for r in self.rows],
            'distance_m': [r.distance.m for r in self.rows],
            'rsrp_dbm': [r.rsrp for r in self.rows],
            'lat': [r.lat for r in self.rows],
            'lon': [r.lon for r in self.rows],
        })


@dataclass(frozen=True)
class DistanceBin:
    center: Distance
    mean_rsrp: float      # dBm
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise DegenerateDataError(f"empty bin at {self.center.m:g} m")


class Binning(NamedTuple):
    bins: List[DistanceBin]
    dropped: int


def _number(text: str, column: str, row: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"column '{column}': cannot parse {text!r} as a number", row=row)
    if not np.isfinite(value):
        raise ParseError(f"column '{column}': value must be finite, got {text!r}", row=row)
    return value


def _optional_number(text: str, column: str, row: int) -> Optional[float]:
    if text is None or str(text).strip() == '':
        return None
    return _number(text, column, row)


class DriveTestProcessor:
    """Handle drive-test ingestion"""

    def __init__(self, bin_width_m: float = 50.0, max_distance_m: float = 500.0):
        """Initialize with the binning grid"""
        self.bin_width_m = bin_width_m
        self.max_distance_m = max_distance_m

    def parse_csv(self, csv_data: Union[str, bytes]) -> DriveTestLog:
        """Parse a `site_id,sector,distance_m,rsrp_dbm[,lat,lon]` CSV"""
        if isinstance(csv_data, bytes):
            try:
                csv_data = csv_data.decode('utf-8')
            except UnicodeDecodeError as e:
                raise ParseError(f"file is not UTF-8: {e}")
        if not csv_data.strip():
            raise UsageError("empty file")

        try:
            # all columns as text; numbers are parsed per row
            df = pd.read_csv(io.StringIO(csv_data), dtype=str, keep_default_na=False,
                             skipinitialspace=True)
        except pd.errors.EmptyDataError:
            raise UsageError("empty file")
        except pd.errors.ParserError as e:
            raise ParseError(f"malformed CSV: {e}")

        df.columns = [str(c).strip().lower() for c in df.columns]
        for column in REQUIRED_COLUMNS:
            if column not in df.columns:
                raise ParseError(f"missing required column '{column}'")
        if df.empty:
            raise UsageError("no samples")

        rows = []
        for row_number, record in enumerate(df.to_dict('records'), start=1):
            site_id = str(record['site_id']).strip()
            if not site_id:
                raise ParseError("empty site_id", row=row_number)
            sector = _number(record['sector'], 'sector', row_number)
            distance_m = _number(record['distance_m'], 'distance_m', row_number)
            rsrp_dbm = _number(record['rsrp_dbm'], 'rsrp_dbm', row_number)
            try:
                rows.append(RsrpSample(
                    distance=Distance(distance_m),
                    rsrp=rsrp_dbm,
                    site_id=site_id,
                    sector=sector,
                    lat=_optional_number(record.get('lat'), 'lat', row_number),
                    lon=_optional_number(record.get('lon'), 'lon', row_number),
                ))
            except ParseError as e:
                raise ParseError(str(e), row=row_number)
            except ModelDomainError as e:
                raise ParseError(str(e), row=row_number)

        notes = []
        atypical = sum(1 for r in rows if not r.rsrp_in_typical_range)
        if atypical:
            note = f"{atypical} samples with RSRP outside [-140, -40] dBm"
            logger.warning(note)
            notes.append(note)

        site_ids = sorted({r.site_id for r in rows})
        if len(site_ids) > 1:
            raise ParseError(f"log mixes sites {', '.join(site_ids)}")
        logger.info(f"Parsed {len(rows)} samples for site {site_ids[0]}")
        return DriveTestLog(rows=tuple(rows), site_id=site_ids[0], warnings=tuple(notes))

    def read_csv_file(self, path: Union[str, Path]) -> DriveTestLog:
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            raise ParseError(f"cannot read {path}: {e}")
        return self.parse_csv(data)

    def serialize_csv(self, log: DriveTestLog) -> bytes:
        """Inverse of parse_csv; floats keep 17 significant digits"""
        df = log.to_frame()
        if df['lat'].isna().all() and df['lon'].isna().all():
            df = df.drop(columns=['lat', 'lon'])
        return df.to_csv(index=False, float_format='%.17g', lineterminator='\n').encode('utf-8')

    def average_sectors(self, log: DriveTestLog) -> List[Tuple[Distance, float]]:
        """
        Mean RSRP per distance across the sectors present, taken directly
        on the dBm values.
        """
        df = log.to_frame()
        per_sector = df.groupby(['distance_m', 'sector'], sort=True)['rsrp_dbm'].mean()
        per_distance = per_sector.groupby(level='distance_m').mean()
        return [(Distance(d), float(rsrp)) for d, rsrp in per_distance.items()]

    def bin_by_distance(self, samples: Iterable[Tuple[DistanceLike, float]],
                        width: DistanceLike = 50.0, max_distance: DistanceLike = 500.0) -> Binning:
        """
        Assign samples to the nearest centre k * width, k = 1 .. max / width.

        [25, 75) lands in the 50 m bin for the default width; samples beyond
        max_distance or whose nearest centre falls outside the grid are
        dropped and counted.
        """
        try:
            width_m = as_distance(width).m
        except ModelDomainError as e:
            raise UsageError(f"bin width must be positive: {e}")
        max_m = as_distance(max_distance).m
        n_bins = int(np.floor(max_m / width_m + 1e-9))

        frame = pd.DataFrame([(as_distance(d).m, float(r)) for d, r in samples],
                             columns=['distance_m', 'rsrp_dbm'])
        if frame.empty:
            return Binning(bins=[], dropped=0)

        k = np.floor(frame['distance_m'] / width_m + 0.5).astype(int)
        keep = (k >= 1) & (k <= n_bins) & (frame['distance_m'] <= max_m)
        dropped = int((~keep).sum())
        if dropped:
            logger.warning(f"Dropped {dropped} samples outside the {width_m:g}-{n_bins * width_m:g} m grid")

        grouped = frame[keep].groupby(k[keep])['rsrp_dbm'].agg(['mean', 'count'])
        bins = [
            DistanceBin(center=Distance(int(index) * width_m), mean_rsrp=float(row['mean']), count=int(row['count']))
            for index, row in grouped.iterrows()
        ]
        return Binning(bins=bins, dropped=dropped)

    def to_measurement_set(self, log: DriveTestLog, budget: LinkBudget, ctx: RadioContext) -> MeasurementSet:
        """Sector-average, bin, and convert each bin to path loss via the EIRP"""
        notes = list(log.warnings)
        binning = self.bin_by_distance(self.average_sectors(log), self.bin_width_m, self.max_distance_m)
        if binning.dropped:
            notes.append(f"{log.site_id}: {binning.dropped} samples outside the distance grid were dropped")

        kept = [b for b in binning.bins if b.center.m >= ctx.d0]
        if len(kept) < len(binning.bins):
            note = f"{log.site_id}: {len(binning.bins) - len(kept)} bins closer than d0 = {ctx.d0:g} m were dropped"
            logger.warning(note)
            notes.append(note)
        if len(kept) < 2:
            raise DegenerateDataError(f"site {log.site_id}: {len(kept)} distance bins, need at least 2")

        eirp_dbm = budget.eirp
        samples = tuple((b.center, measured_path_loss(eirp_dbm, b.mean_rsrp)) for b in kept)
        logger.info(f"Site {log.site_id}: {len(samples)} bins, EIRP {eirp_dbm:.2f} dBm")
        return MeasurementSet(site_id=log.site_id, env=ctx.env, ctx=ctx, samples=samples,
                              warnings=tuple(notes))

    def synthesize_log(self, model_id: ModelId, ctx: RadioContext, budget: LinkBudget,
                       site_id: str = 'synthetic', params: Optional[EricssonParams] = None,
                       distances: Optional[Sequence[float]] = None,
                       sectors: Sequence[int] = (1, 2, 3)) -> DriveTestLog:
        """A noiseless drive test whose RSRP is exactly EIRP minus the model's loss"""
        if distances is None:
            distances = sweep_distances(ctx.d0, self.max_distance_m, self.bin_width_m)
        rows = []
        for d_m in distances:
            rsrp = synthesize_rsrp(budget, predict(model_id, ctx, d_m, params))
            rows.extend(sample(d_m, rsrp, site_id, sector) for sector in sectors)
        log = DriveTestLog(rows=tuple(rows), site_id=site_id)
        return log.with_metadata(ctx.f, ctx.hb, ctx.env)


_default_processor = DriveTestProcessor()

parse_csv = _default_processor.parse_csv
read_csv_file = _default_processor.read_csv_file
serialize_csv = _default_processor.serialize_csv
average_sectors = _default_processor.average_sectors
bin_by_distance = _default_processor.bin_by_distance
to_measurement_set = _default_processor.to_measurement_set
synthesize_log = _default_processor.synthesize_log
