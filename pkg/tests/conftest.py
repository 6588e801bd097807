import hypothesis
import pytest

# First-call jit compilation would blow any per-example deadline; the suites
# are also numeric enough that input generation time is irrelevant.
hypothesis.settings.register_profile(
    "transnum", deadline=None, max_examples=60, derandomize=False
)
hypothesis.settings.load_profile("transnum")


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile (or no-op) the hot kernels once, so timed tests measure math."""
    from transnum import _kernels

    _kernels.warmup()
    return _kernels.JIT_ENABLED
