"""Shared helpers for the test suite."""

import math

import numpy as np
import pytest


def make_rng(seed=0):
    # Philox everywhere, matching the engine's stream family
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def unit(v):
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


def min_beta_a1_mean(a, n):
    """E[min of n iid beta(a,1)] = G(1+1/a) G(n+1) / G(n+1+1/a).

    Closed form from P(min > z) = (1 - z^a)^n; exact oracle for the
    single-vector quantization error with n codewords in dimension a+1.
    """
    return math.exp(
        math.lgamma(1.0 + 1.0 / a)
        + math.lgamma(n + 1.0)
        - math.lgamma(n + 1.0 + 1.0 / a)
    )


@pytest.fixture
def rng():
    return make_rng(7)
