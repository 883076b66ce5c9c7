import numpy as np
import pytest

from droughtkit import harness, synth


@pytest.fixture(scope="session")
def synth_csv(tmp_path_factory):
    """Small deterministic dataset shared across tests: 4 counties, 260 weeks."""
    path = tmp_path_factory.mktemp("data") / "synth.csv"
    synth.synth_generate(synth.SynthSpec(n_counties=4, n_weeks=260, seed=11), path)
    return path


@pytest.fixture(scope="session")
def small_weekly(synth_csv):
    from droughtkit import ingest
    return ingest.ingest_csv(synth_csv)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
