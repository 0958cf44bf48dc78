"""Shared fixtures and the acceptance-suite result reporter."""

from __future__ import annotations

import numpy as np
import pytest

from salbox.raster import Raster


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[acceptance] {name}: {status}", flush=True)


@pytest.fixture
def rect_scene_100():
    """100x100 black canvas with a white rectangle at (30, 30, 60, 60)."""
    values = np.zeros((100, 100))
    values[30:60, 30:60] = 1.0
    return Raster(values)
