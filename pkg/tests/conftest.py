import sys

import numpy as np
from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def rand_matrix(rng, d):
    return (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)


def rand_psd(rng, d, rank=None):
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    return g @ g.conj().T / d


dims = st.integers(min_value=1, max_value=5)
exponents = st.sampled_from([2.0, 3.0, 4.0, 6.0])
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
