"""Tests for partial evolution operators and the trace rule."""

from __future__ import annotations

import numpy as np
import pytest

from qchain.engines import (
    chain_distribution,
    conditional_state,
    heisenberg_projector,
    partial_evolution,
    projector_product,
    trace_distribution,
    trace_probability,
)
from qchain.errors import ErrorCode, InvalidInputError
from qchain.hilbert import hadamard
from qchain.models import MeasurementChain

PLUS_PROJECTOR = np.full((2, 2), 0.5)


class TestPartialEvolution:
    """Tests for partial_evolution and Heisenberg projectors."""

    def test_hadamard_partial_evolution(self, hadamard_chain: MeasurementChain) -> None:
        """U_2 Π_0 U_1 for the Hadamard chain."""
        expected = hadamard() @ np.diag([1, 0]) @ hadamard()
        np.testing.assert_allclose(partial_evolution(hadamard_chain, (0,)), expected, atol=1e-15)

    def test_wrong_number_of_classes(self, hadamard_chain: MeasurementChain) -> None:
        """L − 1 intermediate classes are required."""
        with pytest.raises(InvalidInputError, match="intermediate classes") as exc_info:
            partial_evolution(hadamard_chain, (0, 1))
        assert exc_info.value.code is ErrorCode.INDEX_OUT_OF_RANGE

    def test_class_out_of_range(self, hadamard_chain: MeasurementChain) -> None:
        """Intermediate classes are checked against their observable."""
        with pytest.raises(InvalidInputError, match="out of range"):
            partial_evolution(hadamard_chain, (2,))

    def test_heisenberg_step_zero_is_plain_projector(
        self, hadamard_chain: MeasurementChain
    ) -> None:
        """No evolution has happened at t_0."""
        np.testing.assert_allclose(
            heisenberg_projector(hadamard_chain, 0, 0), np.diag([1, 0]), atol=1e-15
        )

    def test_heisenberg_step_one(self, hadamard_chain: MeasurementChain) -> None:
        """H† |0><0| H = |+><+|."""
        np.testing.assert_allclose(
            heisenberg_projector(hadamard_chain, 1, 0), PLUS_PROJECTOR, atol=1e-15
        )

    def test_heisenberg_step_out_of_range(self, hadamard_chain: MeasurementChain) -> None:
        """Time indices beyond L are rejected."""
        with pytest.raises(InvalidInputError, match="Time index 3"):
            heisenberg_projector(hadamard_chain, 3, 0)

    def test_projector_product_is_not_identity(self, hadamard_chain: MeasurementChain) -> None:
        """Π(t_1)Π(t_1) equals U_partial† U_partial and differs from I."""
        product = projector_product(hadamard_chain, (0,))
        evolution = partial_evolution(hadamard_chain, (0,))
        np.testing.assert_allclose(product, evolution.conj().T @ evolution, atol=1e-14)
        assert not np.allclose(product, np.eye(2))

    def test_projector_products_resolve_identity(
        self, degenerate_chain: MeasurementChain
    ) -> None:
        """Summed over the intermediate classes the products give I."""
        total = sum(projector_product(degenerate_chain, (m,)) for m in range(2))
        np.testing.assert_allclose(total, np.eye(3), atol=1e-14)


class TestConditionalState:
    """Tests for conditional_state."""

    def test_default_initial_state(self, hadamard_chain: MeasurementChain) -> None:
        """|0> conditioned on the first readout 0 ends in |+><+| / 2."""
        rho = conditional_state(hadamard_chain, (0,))
        np.testing.assert_allclose(rho, PLUS_PROJECTOR / 2, atol=1e-15)
        assert np.trace(rho).real == pytest.approx(0.5)

    def test_explicit_density_operator(self, hadamard_chain: MeasurementChain) -> None:
        """The maximally mixed state stays Hermitian with trace 1/2."""
        rho = conditional_state(hadamard_chain, (1,), np.eye(2) / 2)
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-15)
        assert np.trace(rho).real == pytest.approx(0.5)

    def test_non_hermitian_rejected(self, hadamard_chain: MeasurementChain) -> None:
        """ρ₀ must be Hermitian."""
        rho0 = np.array([[0.5, 0.5], [0.0, 0.5]])
        with pytest.raises(InvalidInputError, match="not Hermitian") as exc_info:
            conditional_state(hadamard_chain, (0,), rho0)
        assert exc_info.value.code is ErrorCode.INVALID_STATE

    def test_trace_must_be_one(self, hadamard_chain: MeasurementChain) -> None:
        """ρ₀ must have unit trace."""
        with pytest.raises(InvalidInputError, match="trace"):
            conditional_state(hadamard_chain, (0,), np.eye(2))

    def test_positivity(self, hadamard_chain: MeasurementChain) -> None:
        """ρ₀ must be positive semidefinite."""
        with pytest.raises(InvalidInputError, match="positive semidefinite"):
            conditional_state(hadamard_chain, (0,), np.diag([1.5, -0.5]))

    def test_shape(self, hadamard_chain: MeasurementChain) -> None:
        """ρ₀ must match the chain dimension."""
        with pytest.raises(InvalidInputError) as exc_info:
            conditional_state(hadamard_chain, (0,), np.eye(3) / 3)
        assert exc_info.value.code is ErrorCode.DIMENSION_MISMATCH


class TestTraceRule:
    """Tests for trace_probability and trace_distribution."""

    def test_matches_path_sum_degenerate(self, degenerate_chain: MeasurementChain) -> None:
        """Both engines agree on the degenerate chain."""
        trace = trace_distribution(degenerate_chain)
        path_sum = chain_distribution(degenerate_chain)
        assert set(trace.probabilities) == set(path_sum.probabilities)
        assert trace.max_abs_difference(path_sum) < 1e-12
        assert trace_probability(degenerate_chain, (0, 0, 0)) == pytest.approx(4 / 9)

    def test_mixed_initial_state(self, mixed_chain: MeasurementChain) -> None:
        """The trace rule uses ρ₀ directly."""
        assert trace_probability(mixed_chain, (0, 0)) == pytest.approx(0.75)
        assert trace_probability(mixed_chain, (0, 1)) == pytest.approx(0.25)
        assert trace_distribution(mixed_chain).max_abs_difference(
            chain_distribution(mixed_chain)
        ) < 1e-12

    def test_unoccupied_preparation_class(self, hadamard_chain: MeasurementChain) -> None:
        """A preparation class without the state has probability 0."""
        assert trace_probability(hadamard_chain, (1, 0, 0)) == pytest.approx(0.0)
        assert all(key[0] == 0 for key in trace_distribution(hadamard_chain).probabilities)

    def test_wrong_length(self, hadamard_chain: MeasurementChain) -> None:
        """Outcome sequences have L + 1 entries."""
        with pytest.raises(InvalidInputError, match="Expected 3 entries"):
            trace_probability(hadamard_chain, (0, 0))
