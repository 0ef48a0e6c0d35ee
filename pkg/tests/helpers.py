"""Shared sampling helpers for the test suites."""

import math

from xyent.model import ModelParams


def sample_case(rng, regime):
    """Random (gamma, h) inside one regime with tau0 roughly in [0.2, 5]."""
    while True:
        g = rng.uniform(0.3, 1.5)
        if regime == "Case1a":
            if g >= 1.0:
                lo = 0.05
            else:
                lo = 2.0 * math.sqrt(1.0 - g * g) + 0.05
            if lo >= 1.95:
                continue
            h = rng.uniform(lo, 1.95)
        elif regime == "Case1b":
            if g >= 0.97:
                continue
            hi = 2.0 * math.sqrt(1.0 - g * g) - 0.05
            if hi <= 0.0:
                continue
            h = rng.uniform(0.0, hi)
        else:
            h = rng.uniform(2.05, 6.0)
        return ModelParams(g, h)
