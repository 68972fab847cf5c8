import numpy as np
import pytest

from ortheta.lattice import A1, U, direct_sum


@pytest.fixture(scope="session")
def suite():
    return {
        "U": U(),
        "A1": A1(),
        "A1(-1)": A1(-1),
        "U(2)": U(2),
        "U+A1": direct_sum(U(), A1()),
        "U+U": direct_sum(U(), U()),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record one acceptance criterion: (number, label, defect, tolerance, passed)."""
    store = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(num: int, label: str, defect: float, tol: float, passed: bool | None = None):
        ok = defect <= tol if passed is None else passed
        store[num] = (label, defect, tol, bool(ok))
        assert ok, f"criterion {num} ({label}): defect {defect:.3e} above tolerance {tol:.1e}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(ACCEPTANCE, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for num in range(1, 12):
        if num not in store:
            terminalreporter.write_line(f"criterion {num:2d}: FAIL (not reached)")
            continue
        label, defect, tol, ok = store[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {label}  defect={defect:.3e}  tol={tol:.1e}")
