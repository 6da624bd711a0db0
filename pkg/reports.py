"""
Report rendering - JSON documents and plot-ready CSV tables
"""

import json
import logging
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Dict, List, Optional

import pandas as pd

from calibration import CalibratedModel, EvaluationReport
from config import REPORT_VERSION
from propagation import EnvironmentClass, ModelId, PathLossCurve

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = '%.4f'
EXPONENT_FLOAT_FORMAT = '%.3f'


def render_db(value: float, places: int = 1) -> str:
    """Fixed-point rendering with halves rounded away from zero (53.45 -> 53.5)"""
    # the 9-place round absorbs float noise such as 53.449999999999996
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(round(value, 9))).quantize(quantum, rounding=ROUND_HALF_UP))


def render_eirp(eirp_dbm: float) -> str:
    return render_db(eirp_dbm, 1)


@dataclass
class SiteResult:
    """Everything one command learned about one site"""

    site_id: str
    environment: EnvironmentClass
    frequency_mhz: float
    reports: List[EvaluationReport] = field(default_factory=list)
    best_model: Optional[ModelId] = None
    path_loss_exponent: Optional[float] = None
    calibration: Optional[CalibratedModel] = None
    validation: Optional[EvaluationReport] = None
    eirp_dbm: Optional[float] = None
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'site_id': self.site_id,
            'environment': self.environment.value,
            'frequency_mhz': self.frequency_mhz,
            'warnings': list(self.warnings),
        }
        if self.reports:
            data['reports'] = [r.to_dict() for r in self.reports]
        if self.best_model is not None:
            data['best_model'] = self.best_model.value
        if self.path_loss_exponent is not None:
            data['path_loss_exponent'] = self.path_loss_exponent
        if self.calibration is not None:
            data['calibration'] = self.calibration.to_dict()
        if self.validation is not None:
            data['validation'] = self.validation.to_dict()
        if self.eirp_dbm is not None:
            data['eirp_dbm'] = self.eirp_dbm
            data['eirp_dbm_rendered'] = render_eirp(self.eirp_dbm)
        return data


@dataclass
class ReportDocument:
    command: str
    sites: List[SiteResult] = field(default_factory=list)
    best_by_environment: Dict[EnvironmentClass, ModelId] = field(default_factory=dict)
    version: int = REPORT_VERSION

    @property
    def warnings(self) -> List[str]:
        """Site warnings followed by per-report warnings, deduplicated in order"""
        seen = []
        for site in self.sites:
            notes = list(site.warnings)
            for report in site.reports:
                notes.extend(f"{site.site_id}: {w}" for w in report.warnings)
            for note in notes:
                if note not in seen:
                    seen.append(note)
        return seen

    def to_dict(self) -> Dict[str, Any]:
        return {
            'version': self.version,
            'command': self.command,
            'sites': [s.to_dict() for s in sorted(self.sites, key=lambda s: s.site_id)],
            'best_by_environment': {env.value: model.value for env, model in self.best_by_environment.items()},
            'warnings': self.warnings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + '\n'


def _to_csv(df: pd.DataFrame, float_format: str = CSV_FLOAT_FORMAT) -> str:
    return df.to_csv(index=False, float_format=float_format, lineterminator='\n')


def curve_to_csv(curve: PathLossCurve) -> str:
    df = pd.DataFrame({'distance_m': curve.distances_m, 'path_loss_db': curve.losses_db})
    return _to_csv(df)


def curve_to_json(curve: PathLossCurve) -> str:
    data = {
        'version': REPORT_VERSION,
        'model': curve.label,
        'base_model': curve.model_id.value,
        'offset_db': curve.offset_db,
        'points': [{'distance_m': d, 'path_loss_db': pl} for d, pl in curve.points],
        'warnings': list(curve.warnings),
    }
    return json.dumps(data, sort_keys=True, indent=2) + '\n'


def evaluation_table_csv(doc: ReportDocument) -> str:
    """One row per (site, model): the RMSE table with the site's best model marked"""
    rows = []
    for site in sorted(doc.sites, key=lambda s: s.site_id):
        for report in site.reports:
            rows.append({
                'site_id': site.site_id,
                'model': report.model_id.value,
                'rmse_db': report.rmse,
                'bias_db': report.bias,
                'best': report.model_id is site.best_model,
            })
    return _to_csv(pd.DataFrame(rows, columns=['site_id', 'model', 'rmse_db', 'bias_db', 'best']))


def calibration_table_csv(doc: ReportDocument) -> str:
    rows = []
    for site in sorted(doc.sites, key=lambda s: s.site_id):
        if site.calibration is None or site.validation is None:
            continue
        rows.append({
            'site_id': site.site_id,
            'model': site.calibration.base.value,
            'method': site.calibration.method.value,
            'offset_db': site.calibration.offset,
            'rmse_before_db': site.validation.baseline_rmse,
            'rmse_after_db': site.validation.rmse,
            'passed': site.validation.passed,
        })
    columns = ['site_id', 'model', 'method', 'offset_db', 'rmse_before_db', 'rmse_after_db', 'passed']
    return _to_csv(pd.DataFrame(rows, columns=columns))


def exponent_csv(doc: ReportDocument) -> str:
    rows = [(s.site_id, s.path_loss_exponent) for s in sorted(doc.sites, key=lambda s: s.site_id)]
    df = pd.DataFrame(rows, columns=['site_id', 'path_loss_exponent'])
    return _to_csv(df, EXPONENT_FLOAT_FORMAT)
