import numpy as np
import pytest

from hmdemand.pipeline import bundled_profile, distance_bundle
from hmdemand.synth import gen_panel, milk_truth


@pytest.fixture(scope="session")
def profile():
    return bundled_profile()


@pytest.fixture(scope="session")
def bundle():
    return distance_bundle()


@pytest.fixture(scope="session")
def noisy_panel():
    return gen_panel(milk_truth(), 209, seed=11)


@pytest.fixture(scope="session")
def exact_panel():
    return gen_panel(milk_truth(noise_scale=0), 209, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
