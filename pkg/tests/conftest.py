import numpy as np
import pytest

from cavity_dressed.params import KHZ, paper_params


@pytest.fixture
def fig2_params():
    return paper_params(n_atoms=25000, eta=87000, delta_omega=900, gamma_d=1)


@pytest.fixture
def fig4_params():
    return paper_params(n_atoms=22500, eta=80000, delta_omega=620, gamma_d=1)


@pytest.fixture
def bistable_params():
    # located by a dense residual scan: three roots on resonance
    return paper_params(n_atoms=200, eta=3000)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def khz(v):
    return np.asarray(v, dtype=float) * KHZ


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """Log one PASS/FAIL line per acceptance criterion; echoed in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def _record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        return bool(ok)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
