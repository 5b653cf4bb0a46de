"""Seeded random chains, observables and experiment parameters."""

from __future__ import annotations

import numpy as np

from qchain.gedanken.params import random_two_observer_params
from qchain.hilbert import haar_random_unitary
from qchain.models.chain import EigenClass, InitialState, MeasurementChain, Observable

DIMS = (2, 3, 4)
MAX_STEPS = 4
MIXED_FRACTION = 0.25

__all__ = ["random_chain", "random_observable", "random_two_observer_params"]


def _sub_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**31 - 1))


def random_observable(dim: int, rng: np.random.Generator) -> Observable:
    """Haar eigenbasis with a random partition into 1..dim non-empty classes."""
    classes = int(rng.integers(1, dim + 1))
    order = rng.permutation(dim)
    assignment = np.empty(dim, dtype=int)
    assignment[order[:classes]] = np.arange(classes)
    assignment[order[classes:]] = rng.integers(0, classes, size=dim - classes)
    return Observable(
        basis=haar_random_unitary(dim, _sub_seed(rng)),
        classes=tuple(EigenClass(label=f"c{m}", value=float(m)) for m in range(classes)),
        assignment=tuple(int(m) for m in assignment),
    )


def random_chain(seed: int) -> MeasurementChain:
    """
    Random valid chain, deterministic given the seed.

    N is drawn from 2..4 and L from 1..4. A quarter of the chains start from
    a mixture of two or three Haar-random states under a trivial preparation;
    the rest start from a column of a random non-degenerate preparation basis.
    """
    rng = np.random.default_rng(seed)
    dim = int(rng.choice(DIMS))
    steps = int(rng.integers(1, MAX_STEPS + 1))
    times = tuple(float(t) for t in range(steps + 1))
    unitaries = tuple(haar_random_unitary(dim, _sub_seed(rng)) for _ in range(steps))
    observables = [random_observable(dim, rng) for _ in range(steps)]

    if rng.random() < MIXED_FRACTION:
        count = int(rng.integers(2, 4))
        weights = rng.dirichlet(np.ones(count))
        states = [haar_random_unitary(dim, _sub_seed(rng))[:, 0] for _ in range(count)]
        weights = weights / weights.sum()
        initial = InitialState.mixed(list(zip(weights.tolist(), states, strict=True)))
        preparation = Observable.trivial(dim)
    else:
        basis = haar_random_unitary(dim, _sub_seed(rng))
        preparation = Observable.non_degenerate(basis)
        initial = InitialState.pure(basis[:, int(rng.integers(0, dim))])

    return MeasurementChain(
        times=times,
        unitaries=unitaries,
        observables=(preparation, *observables),
        initial=initial,
    )
