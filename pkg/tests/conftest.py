import numpy as np
import pytest

from nimt.harness import build_grid, synthetic_image
from nimt.images import write_pgm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def image_pair(tmp_path):
    """Small target / init / alternative PGM files for image runs."""
    paths = {}
    for name in ("ring", "eight", "oval"):
        p = tmp_path / f"{name}.pgm"
        write_pgm(p, synthetic_image(name, size=8))
        paths[name] = p
    return paths
