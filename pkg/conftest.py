"""
Shared fixtures for the test suite
"""

from pathlib import Path

import pytest

import config
import ingest
from link_budget import LinkBudget
from propagation import EnvironmentClass, RadioContext

SITES_DIR = Path(__file__).parent / 'sites'


@pytest.fixture(autouse=True)
def no_ambient_site_config(monkeypatch):
    """Keep a developer's PATHCAL_CONFIG out of the tests"""
    monkeypatch.delenv('PATHCAL_CONFIG', raising=False)
    monkeypatch.setattr(config, 'PATHCAL_CONFIG', '')


@pytest.fixture
def budget():
    return LinkBudget()


@pytest.fixture
def urban_ctx():
    return RadioContext(f=800.0, hb=24.0, env=EnvironmentClass.URBAN_LARGE_CITY)


@pytest.fixture
def suburban_ctx():
    return RadioContext(f=800.0, hb=32.0, env=EnvironmentClass.SUBURBAN)


@pytest.fixture
def sites_dir():
    return SITES_DIR


@pytest.fixture
def write_csv(tmp_path):
    """Write drive-test rows (site_id, sector, distance_m, rsrp_dbm) to a CSV"""
    def _write(rows, name='drive_test.csv', header='site_id,sector,distance_m,rsrp_dbm'):
        lines = [header] + [','.join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rows]
        path = tmp_path / name
        path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        return path
    return _write


@pytest.fixture
def write_drive_test(tmp_path, budget):
    """Write a noiseless drive test generated from one model"""
    def _write(model_id, ctx, site_id='synthetic', params=None, distances=None):
        log = ingest.synthesize_log(model_id, ctx, budget, site_id=site_id, params=params, distances=distances)
        path = tmp_path / f"{site_id}.csv"
        path.write_bytes(ingest.serialize_csv(log))
        return path
    return _write


@pytest.fixture
def write_site_config(tmp_path):
    def _write(site_id, **values):
        lines = [f"site_id={site_id}"] + [f"{key}={value}" for key, value in values.items()]
        path = tmp_path / f"{site_id}.env"
        path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        return path
    return _write
