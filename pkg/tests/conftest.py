import pytest


@pytest.fixture(autouse=True)
def isolated_output_dir(settings, tmp_path):
    """Commands without --out write into a per-test directory."""
    settings.HYPOCAL_OUTPUT_DIR = str(tmp_path / 'hypocal-output')
    settings.HYPOCAL_SEED = None
    settings.HYPOCAL_THREADS = 1
