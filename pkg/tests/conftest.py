import numpy as np
import pytest

import esbm


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    """Compile the jitted sweep kernel once so timing-sensitive tests see
    steady-state speed."""
    net = esbm.Network(4, [(1, 2), (2, 3), (3, 4)])
    esbm.run_chain(
        net,
        esbm.DirichletProcess(1.0),
        esbm.LikelihoodSpec(),
        esbm.SamplerConfig(sweeps=3, burn_in=0, seed=0),
    )


@pytest.fixture
def small_net():
    """Deterministic 8-node network with two planted blocks of 4."""
    rng = np.random.default_rng(42)
    sizes = (4, 4)
    theta = np.array([[0.8, 0.15], [0.15, 0.8]])
    spec = esbm.GeneratorSpec(sizes=sizes, theta=theta, seed=42)
    net, truth = esbm.generate(spec)
    return net, truth


def random_canonical(rng, V, max_h):
    """Random canonical label vector on V nodes with at most max_h clusters."""
    raw = rng.integers(1, max_h + 1, size=V)
    return esbm.canonicalize(raw)
