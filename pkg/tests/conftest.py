import numpy as np
import pytest

from twistmin.testfun import Transforms, build_test_pair

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def report(k: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def pair8():
    rng = np.random.default_rng(20240607)
    return build_test_pair(0.375, rng.uniform(-1, 1, 8))


@pytest.fixture(scope="session")
def tf8(pair8):
    return Transforms(pair8)
