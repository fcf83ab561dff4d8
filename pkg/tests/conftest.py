import numpy as np
import pytest

from sme_lab.lti import LinearSystem

# the randomly generated 2x2 benchmark system used across the suite
A_BENCH = np.array([[0.377, -0.788], [-0.533, 0.143]])
B_BENCH = np.array([[1.067, -0.366], [0.520, -0.480]])


@pytest.fixture(scope="session")
def bench_system():
    return LinearSystem(A_BENCH, B_BENCH)


def records_to_rows(records):
    return [
        {
            "seed": r.seed,
            "t": r.t,
            "estimator": r.estimator,
            "diam_lower": r.diam_lower,
            "diam_upper": r.diam_upper,
            "lse_diam": r.lse_diam,
            "wall_ms": r.wall_ms,
        }
        for r in records
    ]
