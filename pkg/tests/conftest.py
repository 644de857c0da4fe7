import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import bruteforce  # noqa: E402

from nufactor import sieve  # noqa: E402

ORACLE_LIMIT = 10**6


@pytest.fixture(scope="session")
def oracle_1e6():
    """Trial-division factor data for every n <= 1e6 (built once, ~20 s)."""
    return bruteforce.factor_stats(0, ORACLE_LIMIT)


@pytest.fixture(scope="session")
def table_1e6():
    return sieve.table_for_interval(0, ORACLE_LIMIT)


@pytest.fixture(scope="session")
def hist_1e8():
    """Long-count omega histogram over (0, 1e8] (shared: ~8 s to build)."""
    from nufactor import counts

    return counts.omega_histogram(0, 10**8, threads=8)
