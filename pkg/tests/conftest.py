import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from simphom.freegrp import FreeGroup

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

F2 = FreeGroup(["a", "b"])


def words(F=F2, max_len=12):
    letters = st.tuples(st.integers(0, F.rank - 1), st.sampled_from([-1, 1]))
    return st.lists(letters, max_size=max_len).map(lambda ls: F.word(ls))


@pytest.fixture
def rng():
    return random.Random(20240611)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


def record(criterion, ok, detail):
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
