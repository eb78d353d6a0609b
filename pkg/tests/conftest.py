import json
import os

import pytest

_ORACLES = os.path.join(os.path.dirname(__file__), "oracles", "oracles.json")


@pytest.fixture(scope="session")
def oracles():
    """Frozen high-precision reference values (see oracles/generate_oracles.py)."""
    with open(_ORACLES) as fh:
        return json.load(fh)
