"""Seeded random chains: normalization and agreement between the two engines."""

from __future__ import annotations

import numpy as np
import pytest

from qchain.engines import (
    chain_distribution,
    markov_probability,
    projector_product,
    trace_distribution,
)
from qchain.models import Observable, validate_chain
from qchain.sampling import random_chain, random_observable

SEEDS = range(200)


class TestRandomChains:
    """Properties that hold for every seeded chain."""

    @pytest.mark.parametrize("seed", SEEDS)
    def test_engines_agree_and_normalize(self, seed: int) -> None:
        """Path sum and trace rule agree, and each sums to 1."""
        chain = random_chain(seed)
        assert validate_chain(chain).ok

        path_sum = chain_distribution(chain)
        trace = trace_distribution(chain)

        assert set(path_sum.probabilities) == set(trace.probabilities)
        assert abs(path_sum.total() - 1.0) < 1e-9
        assert abs(trace.total() - 1.0) < 1e-9
        assert path_sum.max_abs_difference(trace) < 1e-9
        assert min(path_sum.probabilities.values()) > -1e-12

    @pytest.mark.parametrize("seed", range(0, 200, 10))
    def test_markov_product_when_non_degenerate(self, seed: int) -> None:
        """Chains of non-degenerate observables factorize step by step."""
        chain = random_chain(seed)
        if not chain.initial.is_pure:
            pytest.skip("mixtures use a degenerate preparation")
        observables = tuple(Observable.non_degenerate(obs.basis) for obs in chain.observables)
        chain = chain.model_copy(update={"observables": observables})
        distribution = chain_distribution(chain)
        for key, p in distribution.probabilities.items():
            assert markov_probability(chain, key) == pytest.approx(p, abs=1e-10)

    def test_projector_products_resolve_identity(self) -> None:
        """For two-step chains the products over the intermediate classes sum to I."""
        chains = [c for c in map(random_chain, range(40)) if c.steps == 2]
        assert chains
        for chain in chains:
            total = sum(
                projector_product(chain, (m,)) for m in range(chain.observables[1].num_classes)
            )
            np.testing.assert_allclose(total, np.eye(chain.dim), atol=1e-10)

    def test_deterministic(self) -> None:
        """The same seed gives the same chain."""
        first = chain_distribution(random_chain(42))
        second = chain_distribution(random_chain(42))
        assert first.probabilities == second.probabilities


class TestRandomObservable:
    """Tests for random_observable."""

    @pytest.mark.parametrize("seed", range(20))
    def test_partition_is_complete(self, seed: int) -> None:
        """Every class is non-empty and every basis vector assigned."""
        rng = np.random.default_rng(seed)
        obs = random_observable(4, rng)
        assert sorted(set(obs.assignment)) == list(range(obs.num_classes))
        assert 1 <= obs.num_classes <= 4
