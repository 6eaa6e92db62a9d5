"""Shared fixtures; the expensive adaptive/uniform runs are session-scoped
so the acceptance, driver and verify tests reuse a single computation."""

import numpy as np
import pytest

from elastodtn import adaptive_solve, example1_config, example1_mesh, uniform_solve


@pytest.fixture(scope="session")
def run_example1_adaptive():
    """Benchmark adaptive run: 64x4 annulus, N=35, theta=0.5, to ~15k DoF."""
    cfg = example1_config(tolerance=1e-12, max_iters=40)
    return adaptive_solve(cfg, example1_mesh(64, 4), max_dof=15000)


@pytest.fixture(scope="session")
def run_example1_uniform():
    """Uniform-refinement companion from the same initial mesh."""
    cfg = example1_config(tolerance=1e-12)
    return uniform_solve(cfg, example1_mesh(64, 4), rounds=3)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
