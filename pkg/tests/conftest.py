import numpy as np
import pytest

from srfsc.polar_code import CodeSpec, nr_code
from srfsc.sr_compiler import emit_program

RATES = {"1/2": 512, "1/4": 256, "3/4": 768}


@pytest.fixture(scope="session")
def nr_codes():
    return {name: nr_code(1024, K) for name, K in RATES.items()}


@pytest.fixture(scope="session")
def nr_programs(nr_codes):
    return {name: emit_program(spec, 64) for name, spec in nr_codes.items()}


@pytest.fixture
def p84():
    # P(8,4) with frozen {1,2,3,5} (1-based)
    return CodeSpec(8, (0, 1, 2, 4))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_spec(rng, N):
    K = int(rng.integers(0, N + 1))
    return CodeSpec(N, tuple(int(i) for i in rng.permutation(N)[: N - K]))


def random_u(rng, spec, batch):
    u = np.zeros((batch, spec.N), dtype=np.uint8)
    u[:, list(spec.info)] = rng.integers(0, 2, (batch, spec.K))
    return u


def dyadic(rng, shape, scale=4.0):
    """Random reals on a 1/8 grid, so float sums are exact."""
    return np.round(rng.normal(0, scale, shape) * 8) / 8


ACCEPTANCE_LINES: list[str] = []


def record(name: str, ok: bool, detail: str) -> None:
    """Log one acceptance verdict; the lines are repeated in the terminal summary."""
    line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
