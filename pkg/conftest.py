"""Shared map fixtures for the cantor_atlas tests"""
import pytest

from cantor_atlas.services.preset_service import PresetService


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: end-to-end extraction and figure reproduction")


@pytest.fixture(scope="session")
def quartic_3i():
    return PresetService.quartic(3j)


@pytest.fixture(scope="session")
def quartic_figure():
    return PresetService.quartic(1.665j)


@pytest.fixture(scope="session")
def quadratic_4():
    return PresetService.quadratic(4)


@pytest.fixture(scope="session")
def quadratic_small():
    return PresetService.quadratic(0.1)


@pytest.fixture(scope="session")
def squaring():
    return PresetService.quadratic(0)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    from cantor_atlas.config import Config
    monkeypatch.setattr(Config, 'OUTPUT_DIR', str(tmp_path))
    return tmp_path
