import numpy as np
import pytest
from hypothesis import settings

from sezawa.materials import default_materials, interpolate_scaln
from sezawa.mbvd import MbvdParams

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")

# Device used throughout: fs ~ 15.9 GHz, Qm ~ 380, kt2 ~ 4.5 %.
REF_DEVICE = MbvdParams(Rm=26.3, Lm=100e-9, Cm=1e-15, C0=26e-15, R0=2.0, Rs=1.0)


def random_passive_s(rng, n, smax=0.95, smin=0.05):
    """n random 2x2 S matrices with singular values in [smin, smax]."""
    out = np.empty((n, 2, 2), dtype=complex)
    for k in range(n):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        u, _ = np.linalg.qr(a)
        v, _ = np.linalg.qr(b)
        out[k] = u @ np.diag(rng.uniform(smin, smax, 2)) @ v
    return out


@pytest.fixture(scope="session")
def db():
    return default_materials()


@pytest.fixture(scope="session")
def ref_template(db):
    from sezawa.dispersion import StackTemplate

    return StackTemplate(
        piezo=interpolate_scaln(db, 0.3),
        substrate=db["6H-SiC"],
        wavelength=400e-9,
        electrode=db["AlSiCu"],
        coverage=0.5,
    )


ACCEPTANCE_LINES = {}


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def _record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
