import numpy as np
import pytest

from oodbench.datasets.synthetic import shapes
from oodbench.nn import TrainConfig, small_convnet, train_classifier

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_log():
    """Criterion number -> (passed, detail); printed in the terminal summary."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def tiny_shapes():
    """Small 12x12 version of the shape dataset: (x_train, y_train, x_test, y_test)."""
    x, y = shapes(n_per_class=40, size=12, seed=3)
    rng = np.random.default_rng(0)
    order = rng.permutation(len(x))
    x, y = x[order], y[order]
    return x[:300], y[:300], x[300:], y[300:]


@pytest.fixture(scope="session")
def tiny_net(tiny_shapes):
    x, y, _, _ = tiny_shapes
    net = small_convnet((1, 12, 12), 10, channels=4, hidden=16, seed=0)
    net, _ = train_classifier(x, y, TrainConfig(lr=0.01, epochs=25, batch_size=32, seed=0), net=net)
    return net
