"""Tests for scoring, ranking, exponent estimation and offset calibration"""

import numpy as np
import pytest

from calibration import (
    CalibratedModel,
    CalibrationMethod,
    EvaluationReport,
    MeasurementSet,
    calibrate,
    calibrate_bias_offset,
    calibrate_rmse_offset,
    evaluate,
    evaluate_all,
    path_loss_exponent,
    rank,
    rmse,
    select_best,
    select_best_by_environment,
    validate,
)
from errors import DegenerateDataError, UsageError
from propagation import EnvironmentClass, EricssonParams, ModelId, RadioContext, ericsson, fspl, predict

DISTANCES = [50.0 * k for k in range(1, 11)]


def _model_set(ctx, model_id=ModelId.FSPL, residuals=None, site_id='site', params=None):
    predicted = np.array([predict(model_id, ctx, d, params) for d in DISTANCES])
    measured = predicted + (0.0 if residuals is None else np.asarray(residuals))
    return MeasurementSet.from_arrays(site_id, ctx, DISTANCES, measured)


def _report(model_id, value):
    return EvaluationReport(model_id=model_id, rmse=value, bias=0.0, residuals=())


class TestRmse:
    def test_known_value(self):
        assert rmse([100.0, 110.0], [103.0, 105.0]) == pytest.approx(4.1231, abs=1e-4)

    def test_identical_series(self):
        assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(UsageError):
            rmse([1.0, 2.0], [1.0])

    def test_empty(self):
        with pytest.raises(UsageError):
            rmse([], [])

    def test_scale_and_permutation_invariance(self):
        rng = np.random.default_rng(7)
        measured = rng.normal(120.0, 10.0, 50)
        predicted = rng.normal(120.0, 10.0, 50)
        base = rmse(measured, predicted)
        assert rmse(3.0 * measured, 3.0 * predicted) == pytest.approx(3.0 * base, rel=1e-12)
        order = rng.permutation(50)
        assert rmse(measured[order], predicted[order]) == pytest.approx(base, rel=1e-12)


class TestMeasurementSet:
    def test_needs_two_samples(self, urban_ctx):
        with pytest.raises(DegenerateDataError):
            MeasurementSet.from_arrays('s', urban_ctx, [100.0], [120.0])

    def test_distances_strictly_increasing(self, urban_ctx):
        with pytest.raises(UsageError):
            MeasurementSet.from_arrays('s', urban_ctx, [100.0, 100.0], [120.0, 121.0])

    def test_first_sample_not_below_reference(self, urban_ctx):
        with pytest.raises(UsageError):
            MeasurementSet.from_arrays('s', urban_ctx, [40.0, 100.0], [110.0, 120.0])


class TestPathLossExponent:
    @pytest.mark.parametrize('n_true', [2.0, 3.5, 5.0])
    def test_recovers_log_linear_slope(self, urban_ctx, n_true):
        losses = [70.0 + 10.0 * n_true * np.log10(d / 50.0) for d in DISTANCES]
        ms = MeasurementSet.from_arrays('s', urban_ctx, DISTANCES, losses)
        assert path_loss_exponent(ms) == pytest.approx(n_true, abs=1e-6)

    def test_free_space_is_two(self, urban_ctx):
        assert path_loss_exponent(_model_set(urban_ctx)) == pytest.approx(2.0, abs=1e-9)

    def test_two_samples_are_enough(self, urban_ctx):
        ms = MeasurementSet.from_arrays('s', urban_ctx, [50.0, 500.0], [80.0, 110.0])
        assert path_loss_exponent(ms) == pytest.approx(3.0, abs=1e-9)

    def test_first_sample_replaces_missing_reference_bin(self, urban_ctx):
        distances = DISTANCES[1:]
        losses = [75.0 + 30.0 * np.log10(d / distances[0]) for d in distances]
        ms = MeasurementSet.from_arrays('s', urban_ctx, distances, losses)
        assert urban_ctx.d0 < distances[0]
        assert path_loss_exponent(ms) == pytest.approx(3.0, abs=1e-9)


class TestEvaluate:
    def test_generating_model_scores_zero(self, urban_ctx):
        ms = _model_set(urban_ctx, ModelId.HATA)
        report = evaluate(ms, ModelId.HATA)
        assert report.rmse < 1e-9
        assert report.bias == pytest.approx(0.0, abs=1e-9)
        assert len(report.residuals) == len(DISTANCES)

    def test_residual_sign_is_measured_minus_predicted(self, urban_ctx):
        report = evaluate(_model_set(urban_ctx, residuals=np.full(10, 4.0)), ModelId.FSPL)
        assert report.bias == pytest.approx(4.0)
        assert all(r == pytest.approx(4.0) for r in report.residuals)

    def test_evaluate_all_uses_fixed_order(self, urban_ctx):
        reports = evaluate_all(_model_set(urban_ctx), [ModelId.SUI, ModelId.FSPL, ModelId.SUI])
        assert [r.model_id for r in reports] == [ModelId.FSPL, ModelId.SUI]

    def test_sui_warning_travels_with_report(self):
        ctx = RadioContext(f=2600.0, hb=25.0, env=EnvironmentClass.URBAN_MEDIUM_SMALL_CITY)
        report = evaluate(_model_set(ctx), ModelId.SUI)
        assert any('2 GHz' in w for w in report.warnings)

    def test_report_dict(self, urban_ctx):
        data = evaluate(_model_set(urban_ctx), ModelId.FSPL).to_dict()
        assert set(data) == {'model', 'rmse_db', 'bias_db', 'residuals_db', 'warnings'}


class TestSelection:
    def test_lowest_rmse_wins(self):
        reports = [_report(ModelId.HATA, 7.0), _report(ModelId.SUI, 3.0), _report(ModelId.ECC33, 5.0)]
        assert select_best(reports) is ModelId.SUI
        assert [r.model_id for r in rank(reports)] == [ModelId.SUI, ModelId.ECC33, ModelId.HATA]

    def test_ties_follow_model_order(self):
        reports = [_report(ModelId.ERICSSON, 2.0), _report(ModelId.COST231, 2.0)]
        assert select_best(reports) is ModelId.COST231

    def test_choice_ignores_report_order(self):
        rng = np.random.default_rng(11)
        reports = [_report(m, float(v)) for m, v in zip(ModelId, rng.uniform(1.0, 50.0, 6))]
        expected = min(reports, key=lambda r: r.rmse).model_id
        for _ in range(20):
            shuffled = [reports[i] for i in rng.permutation(len(reports))]
            assert select_best(shuffled) is expected

    def test_empty_reports(self):
        with pytest.raises(UsageError):
            select_best([])

    def test_best_by_environment_uses_mean_rmse(self):
        urban = EnvironmentClass.URBAN_LARGE_CITY
        suburban = EnvironmentClass.SUBURBAN
        best = select_best_by_environment([
            (urban, [_report(ModelId.ERICSSON, 10.0), _report(ModelId.HATA, 12.0)]),
            (urban, [_report(ModelId.ERICSSON, 20.0), _report(ModelId.HATA, 14.0)]),
            (suburban, [_report(ModelId.SUI, 5.0), _report(ModelId.ECC33, 9.0)]),
        ])
        assert best == {urban: ModelId.HATA, suburban: ModelId.SUI}


class TestCalibration:
    def test_constant_residual_reaches_zero(self, urban_ctx):
        ms = _model_set(urban_ctx, ModelId.ERICSSON, residuals=np.full(10, 17.98))
        for method in CalibrationMethod:
            cal = calibrate(ms, ModelId.ERICSSON, method)
            assert cal.offset == pytest.approx(17.98, abs=1e-9)
            assert validate(ms, cal).rmse < 1e-9

    def test_rmse_offset_sign(self, urban_ctx):
        under = calibrate_rmse_offset(_model_set(urban_ctx, residuals=np.full(10, 5.0)), ModelId.FSPL)
        over = calibrate_rmse_offset(_model_set(urban_ctx, residuals=np.full(10, -5.0)), ModelId.FSPL)
        assert under.offset == pytest.approx(5.0)
        assert over.offset == pytest.approx(-5.0)

    def test_rmse_offset_is_zero_for_zero_bias(self, urban_ctx):
        ms = _model_set(urban_ctx, residuals=[1.0, -1.0] * 5)
        unbiased = EvaluationReport(model_id=ModelId.FSPL, rmse=1.0, bias=0.0, residuals=())
        cal = calibrate_rmse_offset(ms, ModelId.FSPL, report=unbiased)
        assert cal.offset == 0.0

    def test_random_residuals(self, urban_ctx):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            residuals = rng.normal(rng.uniform(-20.0, 20.0), rng.uniform(0.1, 15.0), len(DISTANCES))
            ms = _model_set(urban_ctx, residuals=residuals)
            after_bias = validate(ms, calibrate_bias_offset(ms, ModelId.FSPL))
            after_rmse = validate(ms, calibrate_rmse_offset(ms, ModelId.FSPL))
            assert after_bias.rmse == pytest.approx(np.std(residuals), abs=1e-9)
            assert after_bias.bias == pytest.approx(0.0, abs=1e-9)
            assert after_bias.rmse <= after_rmse.rmse + 1e-12
            assert after_bias.passed

    def test_validation_reports_baseline(self, urban_ctx):
        ms = _model_set(urban_ctx, residuals=np.linspace(2.0, 8.0, 10))
        report = validate(ms, calibrate_bias_offset(ms, ModelId.FSPL))
        assert report.baseline_rmse == pytest.approx(evaluate(ms, ModelId.FSPL).rmse)
        assert report.passed is True
        assert report.to_dict()['passed'] is True

    def test_calibrated_prediction_is_base_plus_offset(self, urban_ctx):
        cal = CalibratedModel(base=ModelId.FSPL, offset=3.25, method=CalibrationMethod.BIAS_OFFSET)
        assert cal.predict(urban_ctx, 300.0) == fspl(800.0, 300.0) + 3.25
        curve = cal.sweep(urban_ctx)
        assert curve.offset_db == 3.25
        assert curve.points[0] == (50.0, fspl(800.0, 50.0) + 3.25)

    def test_ericsson_params_are_pinned(self, urban_ctx):
        params = EricssonParams(36.2, 30.2, 12.0, 0.1)
        ms = _model_set(urban_ctx, ModelId.ERICSSON, residuals=np.full(10, 2.0), params=params)
        cal = calibrate_bias_offset(ms, ModelId.ERICSSON, params)
        assert cal.params == params
        assert calibrate_bias_offset(_model_set(urban_ctx), ModelId.FSPL).params is None

    def test_dict_round_trip(self, urban_ctx):
        ms = _model_set(urban_ctx, ModelId.ERICSSON, residuals=np.full(10, 2.0))
        cal = calibrate_rmse_offset(ms, ModelId.ERICSSON)
        again = CalibratedModel.from_dict(cal.to_dict())
        assert again == cal
        assert again.predict(urban_ctx, 250.0) == ericsson(urban_ctx, cal.params, 250.0) + cal.offset

    def test_invalid_dict(self):
        with pytest.raises(UsageError):
            CalibratedModel.from_dict({'base': 'fspl'})
        with pytest.raises(UsageError):
            CalibratedModel.from_dict({'base': 'nosuch', 'offset_db': 1.0})
