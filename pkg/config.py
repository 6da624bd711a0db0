"""
Configuration and environment setup

Process settings come from the environment (and a local .env); per-site
radio parameters come from flat `key = value` site files parsed with
python-dotenv.
"""

import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from dotenv import dotenv_values, load_dotenv

from errors import ConfigError, ModelDomainError, UsageError
from link_budget import LinkBudget
from propagation import (
    EnvironmentClass,
    EricssonParams,
    RadioContext,
    TerrainCategory,
)

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

# Logging configuration
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
LOG_FILE = os.getenv('LOG_FILE', '')

# Site config fallback when --config is not given
PATHCAL_CONFIG = os.getenv('PATHCAL_CONFIG', '')

# Multi-site evaluation thread pool
DEFAULT_WORKERS = 4
PATHCAL_WORKERS = os.getenv('PATHCAL_WORKERS', str(DEFAULT_WORKERS))

REPORT_VERSION = 1

# Modeling defaults
DEFAULT_FREQUENCY_MHZ = 800.0
DEFAULT_HB_M = 25.0
DEFAULT_HR_M = 1.5
DEFAULT_D0_M = 50.0
DEFAULT_ENVIRONMENT = EnvironmentClass.URBAN_LARGE_CITY

# Drive-test grid
SWEEP_MIN_M = 50.0
SWEEP_MAX_M = 500.0
SWEEP_STEP_M = 50.0
BIN_WIDTH_M = 50.0
BIN_MAX_M = 500.0

SITE_FILE_SUFFIX = '.env'

_NUMERIC_KEYS = {
    'frequency_mhz', 'hb_m', 'hr_m', 'shadowing_db', 'd0_m',
    'pt_dbm', 'gt_dbi', 'gr_dbi', 'l_con_db', 'l_bo_db', 'l_co_db',
    'ericsson_a0', 'ericsson_a1', 'ericsson_a2', 'ericsson_a3',
}
_BUDGET_KEYS = {
    'pt_dbm': 'pt', 'gt_dbi': 'gt', 'gr_dbi': 'gr',
    'l_con_db': 'l_con', 'l_bo_db': 'l_bo', 'l_co_db': 'l_co',
}
_KNOWN_KEYS = _NUMERIC_KEYS | {'site_id', 'environment', 'terrain'}


def default_site_config_path() -> Optional[str]:
    """Fallback site config path from the environment, or None"""
    return os.getenv('PATHCAL_CONFIG', PATHCAL_CONFIG) or None


@dataclass(frozen=True)
class SiteConfig:
    """Radio and link-budget parameters of one site"""

    site_id: str = 'site'
    frequency_mhz: float = DEFAULT_FREQUENCY_MHZ
    hb_m: float = DEFAULT_HB_M
    hr_m: float = DEFAULT_HR_M
    environment: EnvironmentClass = DEFAULT_ENVIRONMENT
    terrain: Optional[TerrainCategory] = None
    shadowing_db: Optional[float] = None
    d0_m: float = DEFAULT_D0_M
    budget: LinkBudget = field(default_factory=LinkBudget)
    ericsson: Optional[EricssonParams] = None

    def radio_context(self) -> RadioContext:
        return RadioContext(
            f=self.frequency_mhz,
            hb=self.hb_m,
            hr=self.hr_m,
            env=self.environment,
            terrain=self.terrain,
            s=self.shadowing_db,
            d0=self.d0_m,
        )

    def link_budget(self) -> LinkBudget:
        return self.budget

    def ericsson_params(self) -> EricssonParams:
        return self.ericsson or EricssonParams.for_environment(self.environment)

    def with_overrides(self, **overrides) -> 'SiteConfig':
        """Replace the fields given a non-None value"""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes) if changes else self


def site_config_from_mapping(values: Mapping[str, Optional[str]], default_site_id: str = 'site') -> SiteConfig:
    """Build a SiteConfig from raw string values; raises ConfigError"""
    raw: Dict[str, str] = {}
    for key, value in values.items():
        key = key.strip().lower()
        if key not in _KNOWN_KEYS:
            logger.warning(f"Ignoring unknown site config key '{key}'")
            continue
        if value is None or str(value).strip() == '':
            raise ConfigError(f"site config key '{key}' has no value")
        raw[key] = str(value).strip()

    numbers: Dict[str, float] = {}
    for key in _NUMERIC_KEYS & raw.keys():
        try:
            numbers[key] = float(raw[key])
        except ValueError:
            raise ConfigError(f"site config key '{key}': cannot parse {raw[key]!r} as a number")

    try:
        environment = EnvironmentClass.parse(raw['environment']) if 'environment' in raw else DEFAULT_ENVIRONMENT
        terrain = TerrainCategory.parse(raw['terrain']) if 'terrain' in raw else None
        budget = LinkBudget(**{field_name: numbers[key] for key, field_name in _BUDGET_KEYS.items() if key in numbers})
    except UsageError as e:
        raise ConfigError(str(e))

    ericsson = None
    ericsson_keys = [f'ericsson_a{i}' for i in range(4)]
    if any(k in numbers for k in ericsson_keys):
        defaults = EricssonParams.for_environment(environment)
        ericsson = EricssonParams(**{
            f'a{i}': numbers.get(f'ericsson_a{i}', getattr(defaults, f'a{i}')) for i in range(4)
        })

    site = SiteConfig(
        site_id=raw.get('site_id', default_site_id),
        frequency_mhz=numbers.get('frequency_mhz', DEFAULT_FREQUENCY_MHZ),
        hb_m=numbers.get('hb_m', DEFAULT_HB_M),
        hr_m=numbers.get('hr_m', DEFAULT_HR_M),
        environment=environment,
        terrain=terrain,
        shadowing_db=numbers.get('shadowing_db'),
        d0_m=numbers.get('d0_m', DEFAULT_D0_M),
        budget=budget,
        ericsson=ericsson,
    )
    try:
        site.radio_context()
    except ModelDomainError as e:
        raise ConfigError(f"site {site.site_id}: {e}")
    return site


def load_site_config(path: Union[str, Path]) -> SiteConfig:
    """Read one flat `key = value` site file"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"site config not found: {path}")
    values = dotenv_values(path)
    logger.info(f"Loaded site config {path}")
    return site_config_from_mapping(values, default_site_id=path.stem)


def resolve_site_config(path: Optional[Union[str, Path]] = None, site_id: Optional[str] = None) -> SiteConfig:
    """
    Find the configuration for a site.

    `path` may be a site file or a directory of `<site_id>.env` files; when
    absent PATHCAL_CONFIG is tried, then built-in defaults. A PATHCAL_CONFIG
    directory is skipped when there is no site id to pick a file with.
    """
    if not path:
        path = default_site_config_path()
        if path and not site_id and Path(path).is_dir():
            logger.info(f"PATHCAL_CONFIG {path} is a directory and no site id was given; using defaults")
            path = None
    if not path:
        logger.info(f"No site config given; using defaults for {site_id or 'site'}")
        return SiteConfig(site_id=site_id or 'site')

    path = Path(path)
    if path.is_dir():
        if not site_id:
            raise ConfigError(f"{path} is a directory; a site id is needed to pick a file")
        return load_site_config(path / f"{site_id}{SITE_FILE_SUFFIX}")

    site = load_site_config(path)
    if site_id and site.site_id != site_id:
        logger.warning(f"Config {path} describes site '{site.site_id}', applying it to '{site_id}'")
        site = replace(site, site_id=site_id)
    return site


def validate_config():
    """Validate that the process configuration is usable"""
    if not isinstance(logging.getLevelName(LOG_LEVEL.upper()), int):
        logger.warning(f"LOG_LEVEL '{LOG_LEVEL}' is not a logging level; using INFO")
    worker_count()


def worker_count() -> int:
    """Thread pool size for multi-site evaluation, at least 1"""
    try:
        workers = int(str(PATHCAL_WORKERS).strip())
    except ValueError:
        logger.warning(f"PATHCAL_WORKERS '{PATHCAL_WORKERS}' is not an integer; using {DEFAULT_WORKERS}")
        return DEFAULT_WORKERS
    if workers < 1:
        logger.warning(f"PATHCAL_WORKERS={workers} is below 1; evaluating sites one at a time")
        return 1
    return workers
