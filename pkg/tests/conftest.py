import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from slhs import _kernels
from slhs._kernels import _pykernels
from slhs.families import bell
from slhs.qcore import BipartiteState, DensityMatrix

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_BACKENDS = [pytest.param(_pykernels, id="python")]
if _kernels.compiled_available():
    from slhs._kernels import _ckernels

    _BACKENDS.append(pytest.param(_ckernels, id="cython"))


@pytest.fixture(params=_BACKENDS)
def backend(request):
    """Each kernel implementation in turn."""
    return request.param


@pytest.fixture
def use_backend(backend, monkeypatch):
    """Route the dispatching ``_kernels`` module through one implementation."""
    for name in (
        "gellmann_hermitian",
        "expi_hermitian",
        "unitary_from_params",
        "transform",
        "inequality_lhs",
        "measure_sum",
        "search_lhs",
        "search_measure",
    ):
        monkeypatch.setattr(_kernels, name, getattr(backend, name))
    return backend


def pure(ket):
    amps = ket.amps if hasattr(ket, "amps") else np.asarray(ket)
    n = int(round(np.sqrt(amps.size)))
    return BipartiteState(n, n, DensityMatrix(np.outer(amps, amps.conj())))


@pytest.fixture
def phi_plus():
    return pure(bell("phi+"))


@pytest.fixture
def psi_plus():
    return pure(bell("psi+"))


@pytest.fixture
def mixed4():
    return BipartiteState(2, 2, DensityMatrix(np.eye(4) / 4))
