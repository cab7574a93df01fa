"""Shared test helpers: finite-difference oracles and planted fixtures."""

import numpy as np
import pytest

from hierclass import Catalog, PlantedSpec, generate_planted
from hierclass.treespace import internal, leaf


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    """Norm-wise relative disagreement between two gradient vectors."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / denom)


def central_difference(f, x0: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Finite-difference gradient oracle, one coordinate at a time."""
    x0 = np.asarray(x0, dtype=float)
    grad = np.zeros_like(x0)
    for i in range(x0.size):
        up = x0.copy()
        down = x0.copy()
        up[i] += step
        down[i] -= step
        grad[i] = (f(up) - f(down)) / (2.0 * step)
    return grad


def brute_force_agglomerate(values: np.ndarray, method: str):
    """Linkage oracle: recompute every inter-cluster distance from the
    original matrix at each step (min / max / unweighted cross-pair mean),
    with the same deterministic tie-break as the implementation."""
    k = len(values)
    combine = {
        "single": min,
        "complete": max,
        "average": lambda xs: sum(xs) / len(xs),
    }[method]
    clusters = {i: (i,) for i in range(k)}
    active = list(range(k))
    steps = []
    next_id = k
    for _ in range(k - 1):
        best = None
        for a_pos in range(len(active)):
            for b_pos in range(a_pos + 1, len(active)):
                i, j = active[a_pos], active[b_pos]
                d = combine(
                    [values[a, b] for a in clusters[i] for b in clusters[j]]
                )
                if best is None or d < best[0] or (d == best[0] and (i, j) < best[1]):
                    best = (d, (i, j))
        d, (i, j) = best
        members = tuple(sorted(clusters[i] + clusters[j]))
        steps.append((i, j, d, next_id, members))
        clusters[next_id] = members
        active = [c for c in active if c not in (i, j)] + [next_id]
        next_id += 1
    return steps


@pytest.fixture(scope="session")
def pair_catalog():
    return Catalog(("A", "B", "C", "D"))


@pytest.fixture(scope="session")
def pair_tree():
    return internal([internal([leaf(0), leaf(1)]), internal([leaf(2), leaf(3)])])


@pytest.fixture(scope="session")
def pair_spec(pair_catalog, pair_tree):
    """Two tight concept pairs; the geometry used throughout the planted tests."""
    return PlantedSpec(
        catalog=pair_catalog,
        tree=pair_tree,
        feature_dim=10,
        per_concept=200,
        level_offsets=(9.0, 3.0),
        noise=2.0,
    )


@pytest.fixture(scope="session")
def pair_data(pair_spec):
    return generate_planted(pair_spec, seed=0)


@pytest.fixture(scope="session")
def triple_catalog():
    return Catalog(("c1", "c2", "c3"))


@pytest.fixture(scope="session")
def triple_tree():
    return internal([internal([leaf(0), leaf(1)]), leaf(2)])


@pytest.fixture(scope="session")
def triple_data(triple_catalog, triple_tree):
    spec = PlantedSpec(
        catalog=triple_catalog,
        tree=triple_tree,
        feature_dim=10,
        per_concept=150,
        level_offsets=(9.0, 3.0),
        noise=2.0,
    )
    return generate_planted(spec, seed=3)
