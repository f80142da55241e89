import numpy as np
import pytest

from sparsesampling.lp_space import DiscreteMeasure, PointSet


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def uniform_measure(m, dim=1, seed=0):
    pts = np.random.default_rng(seed).uniform(0, 2 * np.pi, size=(m, dim))
    return DiscreteMeasure.uniform(PointSet(pts))


def random_complex(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# small config exercising every CLI subcommand in a few seconds
SMALL_CLI_CONFIG = {
    "v_grid": [4, 6, 8, 12],
    "dictionary_level": 4,
    "members": [{"density": 1.0, "levels": 5, "count": 3}, {"density": 1e-9, "levels": 6, "count": 2}],
    "usd_trials": 20,
    "usd_refine_steps": 1,
    "lebesgue": {"level": 2, "v": 2, "trials": 3, "m": 40},
    "seed": 5,
}


# criterion number -> (passed, title, detail), filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, title, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {title}: {detail}")
