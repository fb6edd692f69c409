import pytest

from dynreg import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the numba kernels once so test timings measure the math
    _kernels.warmup()
