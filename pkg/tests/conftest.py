import numpy as np
import pytest

from hm_finalstate.tensor import DensityOperator, HilbertLayout

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_log():
    def record(criterion: int, passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion:2d}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def random_density(layout: HilbertLayout, gen: np.random.Generator) -> DensityOperator:
    d = layout.total
    a = gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))
    rho = a @ a.conj().T
    rho = rho / np.trace(rho).real
    return DensityOperator(layout, 0.5 * (rho + rho.conj().T))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
