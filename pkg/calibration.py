"""
Calibration - path-loss exponent, RMSE scoring, model ranking and offset calibration

Residuals are always measured minus predicted, so a positive bias means the
model under-predicts the loss.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import DegenerateDataError, ModelDomainError, UsageError
from propagation import (
    Distance,
    EnvironmentClass,
    EricssonParams,
    ModelId,
    PathLossCurve,
    RadioContext,
    as_distance,
    model_warnings,
    predict,
    sweep,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeasurementSet:
    """Distance-ordered measured path loss for one site"""

    site_id: str
    env: EnvironmentClass
    ctx: RadioContext
    samples: Tuple[Tuple[Distance, float], ...]
    warnings: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        samples = tuple((as_distance(d), float(pl)) for d, pl in self.samples)
        if len(samples) < 2:
            raise DegenerateDataError(
                f"site {self.site_id}: {len(samples)} samples, need at least 2"
            )
        distances = [d.m for d, _ in samples]
        if any(b <= a for a, b in zip(distances, distances[1:])):
            raise UsageError(f"site {self.site_id}: sample distances must be strictly increasing")
        if distances[0] < self.ctx.d0:
            raise UsageError(
                f"site {self.site_id}: first sample at {distances[0]:g} m is closer than d0 = {self.ctx.d0:g} m"
            )
        if not all(np.isfinite(pl) for _, pl in samples):
            raise UsageError(f"site {self.site_id}: path loss values must be finite")
        object.__setattr__(self, 'samples', samples)

    @classmethod
    def from_arrays(cls, site_id: str, ctx: RadioContext, distances_m: Iterable[float],
                    path_loss_db: Iterable[float]) -> 'MeasurementSet':
        return cls(site_id=site_id, env=ctx.env, ctx=ctx,
                   samples=tuple(zip(distances_m, path_loss_db)))

    @property
    def distances_m(self) -> np.ndarray:
        return np.array([d.m for d, _ in self.samples])

    @property
    def path_loss_db(self) -> np.ndarray:
        return np.array([pl for _, pl in self.samples])

    def __len__(self) -> int:
        return len(self.samples)


class CalibrationMethod(Enum):
    RMSE_OFFSET = 'rmse'
    BIAS_OFFSET = 'bias'

    @classmethod
    def parse(cls, name: str) -> 'CalibrationMethod':
        key = str(name).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise UsageError(f"unknown calibration method '{name}'")


@dataclass(frozen=True)
class EvaluationReport:
    """
    Score of one model against one measurement set.

    Validation reports also carry the uncalibrated rmse and whether the
    calibrated model beat it.
    """

    model_id: ModelId
    rmse: float
    bias: float
    residuals: Tuple[float, ...]
    site_id: str = ''
    offset_db: float = 0.0
    warnings: Tuple[str, ...] = field(default=())
    baseline_rmse: Optional[float] = None
    passed: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'model': self.model_id.value,
            'rmse_db': self.rmse,
            'bias_db': self.bias,
            'residuals_db': list(self.residuals),
            'warnings': list(self.warnings),
        }
        if self.offset_db != 0.0:
            data['offset_db'] = self.offset_db
        if self.baseline_rmse is not None:
            data['baseline_rmse_db'] = self.baseline_rmse
            data['passed'] = self.passed
        return data


@dataclass(frozen=True)
class CalibratedModel:
    """A base model plus a constant dB offset"""

    base: ModelId
    offset: float
    method: CalibrationMethod
    source_site: str = ''
    params: Optional[EricssonParams] = None

    def __post_init__(self):
        if not np.isfinite(self.offset):
            raise UsageError(f"calibration offset must be finite, got {self.offset}")

    def predict(self, ctx: RadioContext, d) -> float:
        return predict(self.base, ctx, d, self.params) + self.offset

    def sweep(self, ctx: RadioContext, d_min=50.0, d_max=500.0, step=50.0) -> PathLossCurve:
        return sweep(self.base, ctx, self.params, d_min, d_max, step, offset_db=self.offset)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'base': self.base.value,
            'offset_db': self.offset,
            'method': self.method.value,
            'source_site': self.source_site,
        }
        if self.params is not None:
            data['ericsson_params'] = {
                'a0': self.params.a0, 'a1': self.params.a1,
                'a2': self.params.a2, 'a3': self.params.a3,
            }
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CalibratedModel':
        try:
            params = data.get('ericsson_params')
            return cls(
                base=ModelId.parse(data['base']),
                offset=float(data['offset_db']),
                method=CalibrationMethod.parse(data.get('method', 'rmse')),
                source_site=str(data.get('source_site', '')),
                params=EricssonParams(**{k: float(params[k]) for k in ('a0', 'a1', 'a2', 'a3')})
                if params else None,
            )
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"invalid calibrated model description: {e}")


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def rmse(measured: Sequence[float], predicted: Sequence[float]) -> float:
    """Root mean square difference of two paired series"""
    m = np.asarray(measured, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if m.shape != p.shape:
        raise UsageError(f"rmse: series lengths differ ({m.size} vs {p.size})")
    if m.size == 0:
        raise UsageError("rmse: no samples")
    return float(np.sqrt(np.mean((m - p) ** 2)))


def path_loss_exponent(ms: MeasurementSet) -> float:
    """
    Zero-intercept least-squares slope n of PL(d) - PL(d_ref) against
    10 log10(d / d_ref), anchored on the first (reference) sample.

    d_ref is d0 when the d0 bin is populated; when the first sample sits
    farther out it takes the place of d0.
    """
    d = ms.distances_m
    pl = ms.path_loss_db
    x = 10.0 * np.log10(d / d[0])
    y = pl - pl[0]
    denominator = float(np.dot(x, x))
    if denominator == 0.0:
        raise DegenerateDataError(f"site {ms.site_id}: every sample sits at the reference distance")
    n = float(np.dot(y, x) / denominator)
    logger.debug(f"Path loss exponent for {ms.site_id}: {n:.3f}")
    return n


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _predictions(ms: MeasurementSet, model_id: ModelId, params: Optional[EricssonParams],
                 offset_db: float = 0.0) -> np.ndarray:
    values = []
    for d, _ in ms.samples:
        try:
            values.append(predict(model_id, ms.ctx, d, params) + offset_db)
        except ModelDomainError as e:
            raise ModelDomainError(f"{model_id.value} at {d.m:g} m: {e}", distance_m=d.m) from e
    return np.array(values)


def _report(ms: MeasurementSet, model_id: ModelId, predicted: np.ndarray, **extra) -> EvaluationReport:
    residuals = ms.path_loss_db - predicted
    return EvaluationReport(
        model_id=model_id,
        rmse=rmse(ms.path_loss_db, predicted),
        bias=float(np.mean(residuals)),
        residuals=tuple(float(r) for r in residuals),
        site_id=ms.site_id,
        **extra,
    )


def evaluate(ms: MeasurementSet, model_id: ModelId, params: Optional[EricssonParams] = None) -> EvaluationReport:
    """Score one model's predictions at the measured distances"""
    notes = model_warnings(model_id, ms.ctx)
    for note in notes:
        logger.warning(f"{ms.site_id}: {note}")
    report = _report(ms, model_id, _predictions(ms, model_id, params), warnings=tuple(notes))
    logger.debug(f"{ms.site_id} {model_id.value}: rmse={report.rmse:.4f} bias={report.bias:+.4f}")
    return report


def evaluate_all(ms: MeasurementSet, models: Iterable[ModelId],
                 params: Optional[EricssonParams] = None) -> List[EvaluationReport]:
    """Evaluate several models, reported in fixed model order"""
    return [evaluate(ms, m, params) for m in sorted(set(models), key=lambda m: m.order)]


def rank(reports: Sequence[EvaluationReport]) -> List[EvaluationReport]:
    """Lowest rmse first; equal rmse falls back to fixed model order"""
    return sorted(reports, key=lambda r: (r.rmse, r.model_id.order))


def select_best(reports: Sequence[EvaluationReport]) -> ModelId:
    if not reports:
        raise UsageError("select_best: no reports to choose from")
    return rank(reports)[0].model_id


def select_best_by_environment(
        site_reports: Iterable[Tuple[EnvironmentClass, Sequence[EvaluationReport]]]
) -> Dict[EnvironmentClass, ModelId]:
    """Per environment, the model with the lowest mean rmse over that environment's sites"""
    scores: Dict[EnvironmentClass, Dict[ModelId, List[float]]] = defaultdict(lambda: defaultdict(list))
    for env, reports in site_reports:
        for report in reports:
            scores[env][report.model_id].append(report.rmse)
    best = {}
    for env, per_model in scores.items():
        best[env] = min(per_model, key=lambda m: (float(np.mean(per_model[m])), m.order))
    return best


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

def calibrate_rmse_offset(ms: MeasurementSet, model_id: ModelId, params: Optional[EricssonParams] = None,
                          report: Optional[EvaluationReport] = None) -> CalibratedModel:
    """
    Add the model's own rmse, signed by the mean residual: an
    under-predicting model is raised, an over-predicting one lowered and an
    unbiased one left alone.
    """
    report = report or evaluate(ms, model_id, params)
    offset = float(np.sign(report.bias)) * report.rmse
    logger.info(f"{ms.site_id}: {model_id.value} rmse offset {offset:+.4f} dB")
    return CalibratedModel(base=model_id, offset=offset, method=CalibrationMethod.RMSE_OFFSET,
                           source_site=ms.site_id, params=_params_for(model_id, params, ms.ctx))


def calibrate_bias_offset(ms: MeasurementSet, model_id: ModelId, params: Optional[EricssonParams] = None,
                          report: Optional[EvaluationReport] = None) -> CalibratedModel:
    """Shift by the mean residual, the constant offset with the smallest rmse"""
    report = report or evaluate(ms, model_id, params)
    logger.info(f"{ms.site_id}: {model_id.value} bias offset {report.bias:+.4f} dB")
    return CalibratedModel(base=model_id, offset=report.bias, method=CalibrationMethod.BIAS_OFFSET,
                           source_site=ms.site_id, params=_params_for(model_id, params, ms.ctx))


def calibrate(ms: MeasurementSet, model_id: ModelId, method: CalibrationMethod,
              params: Optional[EricssonParams] = None,
              report: Optional[EvaluationReport] = None) -> CalibratedModel:
    if method is CalibrationMethod.BIAS_OFFSET:
        return calibrate_bias_offset(ms, model_id, params, report)
    return calibrate_rmse_offset(ms, model_id, params, report)


def _params_for(model_id: ModelId, params: Optional[EricssonParams], ctx: RadioContext) -> Optional[EricssonParams]:
    # only Ericsson has tunable constants; they travel with the cal-file
    if model_id is not ModelId.ERICSSON:
        return None
    return params or EricssonParams.for_environment(ctx.env)


def validate(ms: MeasurementSet, cal: CalibratedModel) -> EvaluationReport:
    """Score a calibrated model; passes when it beats its uncalibrated base"""
    base = evaluate(ms, cal.base, cal.params)
    predicted = _predictions(ms, cal.base, cal.params, offset_db=cal.offset)
    report = _report(ms, cal.base, predicted, offset_db=cal.offset, warnings=base.warnings,
                     baseline_rmse=base.rmse)
    passed = report.rmse < base.rmse
    if not passed:
        logger.warning(f"{ms.site_id}: calibrated {cal.base.value} rmse {report.rmse:.4f} "
                       f"does not improve on {base.rmse:.4f}")
    return replace(report, passed=passed)
