import pytest
from hypothesis import HealthCheck, settings

from ecwatermark import Curve, shipped

settings.register_profile(
    "suite", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def desk_curve():
    return Curve(2, 2, 17)


@pytest.fixture(scope="session")
def demo_cfg():
    return shipped.load_demo_config()


def small_scenario_dict(**overrides):
    """A fast one-state loop for unit tests; callers override fields freely."""
    d = {
        "horizon": 200,
        "seed": 1,
        "plant": {
            "A": [[0.9]], "B": [[1.0]], "C": [[1.0]], "x0": [1.0],
            "process_noise": {"kind": "none"},
            "measurement_noise": {"kind": "none"},
        },
        "controller": {"A": [[0.0]], "B": [[0.0]], "C": [[0.0]], "D": [[0.0]], "x0": [0.0]},
        "detector": {
            "A": [[0.5]], "B": [[1.0]], "K": [[0.4]], "C": [[-1.0]], "L": [[1.0]],
            "x0": [1.0],
            "threshold": {"mode": "fixed", "value": 0.5},
        },
        "watermark": {"enabled": False},
        "attack": {"kind": "none"},
    }
    d.update(overrides)
    return d
