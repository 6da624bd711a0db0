"""
Command line interface - predict | evaluate | calibrate | exponent

CSV and JSON go to stdout (or --out); logs go to stderr and LOG_FILE.
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import config
import ingest
from calibration import (
    CalibratedModel,
    CalibrationMethod,
    calibrate,
    evaluate,
    evaluate_all,
    path_loss_exponent,
    select_best,
    select_best_by_environment,
    validate,
)
from errors import PathCalError, UsageError
from propagation import EnvironmentClass, ModelId, TerrainCategory, sweep
from reports import (
    ReportDocument,
    SiteResult,
    calibration_table_csv,
    curve_to_csv,
    curve_to_json,
    evaluation_table_csv,
    exponent_csv,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
CALIBRATED_MODEL = 'calibrated'


def configure_logging():
    """Console logging on stderr, plus LOG_FILE when configured"""
    level = getattr(logging, config.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(stream=sys.stderr, level=level, format=LOG_FORMAT)
    root = logging.getLogger()
    if config.LOG_FILE and not any(isinstance(h, logging.FileHandler) for h in root.handlers):
        file_handler = logging.FileHandler(config.LOG_FILE)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        file_handler.setLevel(level)
        root.addHandler(file_handler)
    config.validate_config()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='pathcal',
        description="Path-loss prediction and calibration from LTE drive tests",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Site config file, or a directory of <site_id>.env files '
                                         '(falls back to $PATHCAL_CONFIG)')
    common.add_argument('--out', help='Write the output here instead of stdout')
    common.add_argument('--format', choices=('csv', 'json'), help='Output format')

    commands = parser.add_subparsers(dest='command', required=True)

    predict_parser = commands.add_parser(
        'predict', parents=[common], help='Predicted path loss over a distance sweep',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    predict_parser.add_argument('--model', required=True,
                                help="fspl, hata, cost231, ecc33, sui, ericsson or 'calibrated'")
    predict_parser.add_argument('--cal-file', help='Calibrated model JSON, with --model calibrated')
    predict_parser.add_argument('--site-id', help='Site to pick when --config is a directory')
    predict_parser.add_argument('--freq-mhz', type=float, help='Carrier frequency in MHz')
    predict_parser.add_argument('--hb', type=float, help='Base station antenna height in m')
    predict_parser.add_argument('--hr', type=float, help='Receiver antenna height in m')
    predict_parser.add_argument('--env', help='urban_large_city, urban_medium_small_city, suburban or open')
    predict_parser.add_argument('--terrain', help='SUI terrain category A, B or C')
    predict_parser.add_argument('--shadowing', type=float, help='SUI shadowing term in dB')
    predict_parser.add_argument('--d0', type=float, help='Reference distance in m')
    predict_parser.add_argument('--dmin', type=float, default=config.SWEEP_MIN_M, help='First distance in m')
    predict_parser.add_argument('--dmax', type=float, default=config.SWEEP_MAX_M, help='Last distance in m')
    predict_parser.add_argument('--step', type=float, default=config.SWEEP_STEP_M, help='Distance step in m')
    predict_parser.set_defaults(handler=cmd_predict, default_format='csv')

    evaluate_parser = commands.add_parser(
        'evaluate', parents=[common], help='Score models against drive-test measurements',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    evaluate_parser.add_argument('measurements', nargs='+', help='Drive-test CSV files')
    evaluate_parser.add_argument('--models', default='all', help="Comma separated model ids, or 'all'")
    evaluate_parser.set_defaults(handler=cmd_evaluate, default_format='json')

    calibrate_parser = commands.add_parser(
        'calibrate', parents=[common], help='Fit a constant offset to one model',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    calibrate_parser.add_argument('measurements', help='Drive-test CSV file')
    calibrate_parser.add_argument('--model', default='best', help="Model id, or 'best' for the lowest rmse")
    calibrate_parser.add_argument('--method', default=CalibrationMethod.RMSE_OFFSET.value,
                                  choices=[m.value for m in CalibrationMethod], help='Offset rule')
    calibrate_parser.add_argument('--cal-out', help='Write the calibrated model JSON here')
    calibrate_parser.set_defaults(handler=cmd_calibrate, default_format='json')

    exponent_parser = commands.add_parser(
        'exponent', parents=[common], help='Estimate the path-loss exponent',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    exponent_parser.add_argument('measurements', nargs='+', help='Drive-test CSV files')
    exponent_parser.set_defaults(handler=cmd_exponent, default_format='csv')

    return parser


def parse_models(text: str) -> List[ModelId]:
    if text.strip().lower() == 'all':
        return list(ModelId)
    names = [name for name in text.split(',') if name.strip()]
    if not names:
        raise UsageError("no models given")
    return [ModelId.parse(name) for name in names]


def _output_format(args) -> str:
    return args.format or args.default_format


def _emit(text: str, out: Optional[str]):
    if not out:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding='utf-8')
    except OSError as e:
        raise UsageError(f"cannot write {out}: {e}")
    logger.info(f"Wrote {out}")


def _load_calibrated_model(path: Optional[str]) -> CalibratedModel:
    if not path:
        raise UsageError("--model calibrated needs --cal-file")
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise UsageError(f"{path} does not describe a calibrated model")
    return CalibratedModel.from_dict(data)


def _load_site(path: str, config_path: Optional[str]):
    """Parse a measurement CSV and pair it with its site config"""
    log = ingest.read_csv_file(path)
    logger.info(f"Ingested {path}: {len(log)} samples for {log.site_id}")
    site = config.resolve_site_config(config_path, log.site_id)
    ctx = site.radio_context()
    log = log.with_metadata(ctx.f, ctx.hb, ctx.env)
    ms = ingest.to_measurement_set(log, site.link_budget(), ctx)
    return site, ms


def cmd_predict(args) -> None:
    site = config.resolve_site_config(args.config, args.site_id)
    site = site.with_overrides(
        frequency_mhz=args.freq_mhz,
        hb_m=args.hb,
        hr_m=args.hr,
        environment=EnvironmentClass.parse(args.env) if args.env else None,
        terrain=TerrainCategory.parse(args.terrain) if args.terrain else None,
        shadowing_db=args.shadowing,
        d0_m=args.d0,
    )
    ctx = site.radio_context()

    if args.model.strip().lower() == CALIBRATED_MODEL:
        curve = _load_calibrated_model(args.cal_file).sweep(ctx, args.dmin, args.dmax, args.step)
    else:
        model_id = ModelId.parse(args.model)
        curve = sweep(model_id, ctx, site.ericsson_params(), args.dmin, args.dmax, args.step)

    logger.info(f"Predicted {curve.label} at {len(curve.points)} distances")
    _emit(curve_to_json(curve) if _output_format(args) == 'json' else curve_to_csv(curve), args.out)


def cmd_evaluate(args) -> None:
    models = parse_models(args.models)

    def evaluate_site(path: str) -> SiteResult:
        site, ms = _load_site(path, args.config)
        reports = evaluate_all(ms, models, site.ericsson_params())
        best = select_best(reports)
        best_rmse = min(r.rmse for r in reports)
        logger.info(f"Site {ms.site_id}: best model {best.value} (rmse {best_rmse:.4f} dB)")
        return SiteResult(
            site_id=ms.site_id,
            environment=ms.env,
            frequency_mhz=ms.ctx.f.mhz,
            reports=reports,
            best_model=best,
            path_loss_exponent=path_loss_exponent(ms),
            eirp_dbm=site.link_budget().eirp,
            warnings=list(ms.warnings),
        )

    workers = config.worker_count()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(evaluate_site, args.measurements))

    site_ids = [r.site_id for r in results]
    duplicates = sorted({s for s in site_ids if site_ids.count(s) > 1})
    if duplicates:
        raise UsageError(f"several measurement files for site {', '.join(duplicates)}")

    results.sort(key=lambda r: r.site_id)
    doc = ReportDocument(
        command='evaluate',
        sites=results,
        best_by_environment=select_best_by_environment((r.environment, r.reports) for r in results),
    )
    _emit(doc.to_json() if _output_format(args) == 'json' else evaluation_table_csv(doc), args.out)


def cmd_calibrate(args) -> None:
    site, ms = _load_site(args.measurements, args.config)
    params = site.ericsson_params()
    method = CalibrationMethod.parse(args.method)

    if args.model.strip().lower() == 'best':
        reports = evaluate_all(ms, list(ModelId), params)
        model_id = select_best(reports)
        base_report = next(r for r in reports if r.model_id is model_id)
        logger.info(f"Site {ms.site_id}: calibrating best model {model_id.value}")
    else:
        model_id = ModelId.parse(args.model)
        base_report = evaluate(ms, model_id, params)

    cal = calibrate(ms, model_id, method, params, report=base_report)
    validation = validate(ms, cal)
    logger.info(f"Site {ms.site_id}: rmse {validation.baseline_rmse:.4f} -> {validation.rmse:.4f} dB")

    if args.cal_out:
        _emit(json.dumps(cal.to_dict(), sort_keys=True, indent=2) + '\n', args.cal_out)

    doc = ReportDocument(command='calibrate', sites=[SiteResult(
        site_id=ms.site_id,
        environment=ms.env,
        frequency_mhz=ms.ctx.f.mhz,
        reports=[base_report],
        best_model=model_id,
        calibration=cal,
        validation=validation,
        eirp_dbm=site.link_budget().eirp,
        warnings=list(ms.warnings),
    )])
    _emit(doc.to_json() if _output_format(args) == 'json' else calibration_table_csv(doc), args.out)


def cmd_exponent(args) -> None:
    results = []
    for path in args.measurements:
        site, ms = _load_site(path, args.config)
        n = path_loss_exponent(ms)
        logger.info(f"Site {ms.site_id}: path loss exponent {n:.3f}")
        results.append(SiteResult(
            site_id=ms.site_id,
            environment=ms.env,
            frequency_mhz=ms.ctx.f.mhz,
            path_loss_exponent=n,
            warnings=list(ms.warnings),
        ))
    doc = ReportDocument(command='exponent', sites=results)
    _emit(doc.to_json() if _output_format(args) == 'json' else exponent_csv(doc), args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage and 0 after --help
        return int(e.code or 0)

    configure_logging()
    logger.info(f"Running {args.command}")
    handler: Callable = args.handler
    try:
        handler(args)
    except PathCalError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        return 1
    logger.info(f"Finished {args.command}")
    return 0


if __name__ == '__main__':
    sys.exit(main())
