import pytest

from qfano.search import SearchConfig, SearchReport, enumerate_candidates


@pytest.fixture(scope="session")
def high_report() -> SearchReport:
    """Default search, 3 <= q <= 19."""
    return enumerate_candidates(SearchConfig(q_min=3, q_max=19, workers=2))


@pytest.fixture(scope="session")
def low_report() -> SearchReport:
    """Default search, q = 2."""
    return enumerate_candidates(SearchConfig(q_min=2, q_max=2, workers=2))


@pytest.fixture(scope="session")
def df3_report(high_report) -> SearchReport:
    return SearchReport(high_report.config, tuple(p for p in high_report.candidates if p.df == 3))
