import pytest

from streamcount import engine


def _available_kernels():
    names = ["pure"]
    try:
        engine.kernel_module("compiled")
    except ImportError:
        return names
    return names + ["compiled"]


@pytest.fixture(params=_available_kernels())
def kernel(request):
    """Runs the test once per available event kernel."""
    return request.param
