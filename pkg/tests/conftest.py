from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from torusflow.trigser import COS, SIN, TrigSeries

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

rationals = st.builds(
    Fraction, st.integers(min_value=-6, max_value=6), st.integers(min_value=1, max_value=5)
)


@st.composite
def keys(draw, max_degree=3, parities=((COS, COS), (COS, SIN), (SIN, COS), (SIN, SIN))):
    px, py = draw(st.sampled_from(parities))
    m = draw(st.integers(min_value=1 if px == SIN else 0, max_value=max_degree))
    n = draw(st.integers(min_value=1 if py == SIN else 0, max_value=max_degree))
    return (px, py, m, n)


def series(max_degree=3, max_terms=5, cos_only=False):
    parities = ((COS, COS),) if cos_only else ((COS, COS), (COS, SIN), (SIN, COS), (SIN, SIN))
    return st.dictionaries(
        keys(max_degree, parities), rationals, max_size=max_terms
    ).map(TrigSeries)


def d4_series(max_degree=3, max_terms=4):
    return series(max_degree, max_terms, cos_only=True).map(
        lambda s: s + s.swap_xy() - s.coeff(COS, COS, 0, 0) * 2
    )


@pytest.fixture
def rng():
    import random

    return random.Random(20131)


ACCEPTANCE: dict[str, str] = {}


def record(criterion: str, ok: bool, detail: str) -> bool:
    line = f"{criterion} {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
            terminalreporter.write_line(ACCEPTANCE[key])
