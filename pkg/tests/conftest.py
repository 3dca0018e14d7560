"""Shared fixtures: a few operator setups reused across the test modules.

Session scope keeps the eigensolves and family constructions to one run
each; everything downstream treats them as read-only.
"""

from __future__ import annotations

import numpy as np
import pytest

from magnls import (
    BoundStateFamily,
    GridSpec,
    build_gaussian_well,
    build_gauge_field,
    build_hamiltonian,
    from_function,
    gaussian_bump,
    ground_state,
    make_potential_pair,
    zero_vector_field,
)


def sech_well_potentials(grid: GridSpec):
    """Reflectionless 1D well with ground level at exactly -1 (continuum limit)."""
    v = from_function(grid, lambda x: -2.0 / np.cosh(x) ** 2)
    return make_potential_pair(zero_vector_field(grid), v)


@pytest.fixture(scope="session")
def sech_spec():
    grid = GridSpec(1, (256,), (40.0,))
    return build_hamiltonian(sech_well_potentials(grid))


@pytest.fixture(scope="session")
def sech_eig(sech_spec):
    return ground_state(sech_spec)


@pytest.fixture(scope="session")
def sech_family(sech_spec, sech_eig):
    return BoundStateFamily(sech_spec, sech_eig, sign=1)


@pytest.fixture(scope="session")
def gauss_spec():
    grid = GridSpec(1, (256,), (40.0,))
    return build_hamiltonian(build_gaussian_well(grid, -1.0, 1.0))


@pytest.fixture(scope="session")
def gauss_eig(gauss_spec):
    return ground_state(gauss_spec)


@pytest.fixture(scope="session")
def magnetic_spec():
    """Small 1D operator with a genuine vector potential, dense-oracle sized."""
    grid = GridSpec(1, (64,), (20.0,))
    chi = gaussian_bump(grid, 0.3, 2.0)
    v = from_function(grid, lambda x: -2.0 * np.exp(-(x**2) / 2.0))
    pair = make_potential_pair(build_gauge_field(chi), v)
    return build_hamiltonian(pair)


@pytest.fixture(scope="session")
def magnetic_eig(magnetic_spec):
    return ground_state(magnetic_spec)
