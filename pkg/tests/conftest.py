import numpy as np
import pytest

from riskwatch.simulator import canonical_scenario, generate


@pytest.fixture(scope="session")
def canonical_output():
    """One shared canonical run; generation is deterministic and read-only."""
    return generate(canonical_scenario())


@pytest.fixture(scope="session")
def canonical_arrays(canonical_output):
    """Per-period (probs, ys, losses) arrays of the canonical run."""
    from riskwatch.simulator import generate_arrays

    arrs = generate_arrays(canonical_output.config)
    by_period = {}
    for m in range(1, canonical_output.config.periods + 1):
        mask = arrs["period"] == m
        by_period[m] = (
            arrs["pred_prob"][mask],
            arrs["y"][mask],
            arrs["loss"][mask],
        )
    return by_period


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
