import os

import pytest


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SIDONBOUND_SLOW"):
        return
    skip = pytest.mark.skip(reason="slow; set SIDONBOUND_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
