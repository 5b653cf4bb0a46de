"""Tests for observables, initial states, chain validation and distributions."""

from __future__ import annotations

import math

import numpy as np
import pytest
from pydantic import ValidationError

from qchain.errors import CapacityError, ErrorCode, InvalidInputError
from qchain.hilbert import basis_vector, hadamard, identity
from qchain.models import (
    CompositeSpace,
    Distribution,
    FactorRole,
    InitialState,
    MeasurementChain,
    Observable,
    ensure_valid,
    projector,
    validate_chain,
)

PLUS = np.array([1.0, 1.0]) / math.sqrt(2)


class TestObservable:
    """Tests for Observable construction and projectors."""

    def test_degenerate_projectors(self) -> None:
        """Projectors of a degenerate partition are diagonal blocks."""
        obs = Observable.computational(3, [("low", 0.0, [0, 1]), ("high", 1.0, [2])])
        np.testing.assert_allclose(obs.projector(0), np.diag([1, 1, 0]))
        np.testing.assert_allclose(projector(obs, 1), np.diag([0, 0, 1]))
        assert not obs.is_non_degenerate
        assert obs.members(0) == (0, 1)

    def test_projectors_resolve_identity(self, dft3: np.ndarray) -> None:
        """Σ_m Π_m = I and Π_m Π_n = δ_mn Π_m."""
        obs = Observable.non_degenerate(dft3, ["a", "b", "c"])
        projectors = [obs.projector(m) for m in range(3)]
        np.testing.assert_allclose(sum(projectors), np.eye(3), atol=1e-14)
        np.testing.assert_allclose(projectors[0] @ projectors[1], np.zeros((3, 3)), atol=1e-14)
        np.testing.assert_allclose(projectors[2] @ projectors[2], projectors[2], atol=1e-14)

    def test_projector_index_out_of_range(self) -> None:
        """Class indices beyond the partition are rejected."""
        obs = Observable.trivial(2)
        with pytest.raises(InvalidInputError, match="out of range") as exc_info:
            obs.projector(1)
        assert exc_info.value.code is ErrorCode.INDEX_OUT_OF_RANGE

    def test_index_of(self) -> None:
        """Labels map to class indices."""
        obs = Observable.non_degenerate(identity(2), ["up", "down"])
        assert obs.index_of("down") == 1
        with pytest.raises(InvalidInputError, match="Unknown eigenvalue label"):
            obs.index_of("sideways")

    def test_non_unitary_basis(self) -> None:
        """A non-unitary basis is rejected."""
        with pytest.raises(ValidationError, match="not unitary"):
            Observable.non_degenerate([[1.0, 1.0], [0.0, 1.0]])

    def test_empty_class(self) -> None:
        """Every class must hold at least one basis vector."""
        with pytest.raises(ValidationError, match="without basis vectors"):
            Observable(
                basis=np.eye(2),
                classes=({"label": "a", "value": 0.0}, {"label": "b", "value": 1.0}),
                assignment=(0, 0),
            )

    def test_repeated_labels(self) -> None:
        """Class labels must be distinct."""
        with pytest.raises(ValidationError, match="must be distinct"):
            Observable.non_degenerate(identity(2), ["x", "x"])

    def test_overlapping_partition(self) -> None:
        """A basis index in two classes is an incomplete partition."""
        with pytest.raises(InvalidInputError, match="two classes") as exc_info:
            Observable.computational(2, [("a", 0.0, [0, 1]), ("b", 1.0, [1])])
        assert exc_info.value.code is ErrorCode.INCOMPLETE_PARTITION

    def test_uncovered_basis_vector(self) -> None:
        """Every basis index must belong to a class."""
        with pytest.raises(InvalidInputError, match="belong to no class") as exc_info:
            Observable.computational(3, [("a", 0.0, [0]), ("b", 1.0, [1])])
        assert exc_info.value.code is ErrorCode.INCOMPLETE_PARTITION

    def test_from_state(self) -> None:
        """The prepared class projects onto the state."""
        obs = Observable.from_state(PLUS)
        assert obs.labels[0] == "prepared"
        np.testing.assert_allclose(obs.projector(0), np.outer(PLUS, PLUS), atol=1e-14)
        assert obs.class_of(PLUS) == 0

    def test_preparation_product(self) -> None:
        """A product preparation has the product state as basis column 0."""
        obs = Observable.preparation([PLUS, basis_vector(3, 1)])
        np.testing.assert_allclose(obs.basis[:, 0], np.kron(PLUS, basis_vector(3, 1)))
        assert obs.dim == 6
        assert obs.is_non_degenerate

    def test_from_class_vectors(self) -> None:
        """Class vectors become basis columns in order."""
        minus = np.array([1.0, -1.0]) / math.sqrt(2)
        obs = Observable.from_class_vectors([("plus", 1.0, [PLUS]), ("minus", -1.0, [minus])])
        np.testing.assert_allclose(obs.basis, hadamard(), atol=1e-15)
        assert obs.class_of(minus) == 1

    def test_class_of_straddling_vector(self) -> None:
        """A vector spread over classes has no single class."""
        obs = Observable.non_degenerate(identity(2))
        assert obs.class_of(PLUS) is None
        np.testing.assert_allclose(obs.class_weights(PLUS), [0.5, 0.5])


class TestInitialState:
    """Tests for pure and mixed initial states."""

    def test_pure(self) -> None:
        """A pure state exposes its vector."""
        state = InitialState.pure(PLUS)
        assert state.is_pure
        np.testing.assert_allclose(state.vector, PLUS)

    def test_mixture_density_matrix(self) -> None:
        """ρ₀ is the weighted sum of component projectors."""
        state = InitialState.mixed([(0.5, basis_vector(2, 0)), (0.5, PLUS)])
        expected = 0.5 * np.diag([1, 0]) + 0.5 * np.full((2, 2), 0.5)
        np.testing.assert_allclose(state.density_matrix(), expected)
        with pytest.raises(InvalidInputError, match="mixture"):
            _ = state.vector

    def test_weights_must_sum_to_one(self) -> None:
        """Mixture weights that do not sum to 1 are rejected."""
        with pytest.raises(ValidationError, match="sum to"):
            InitialState.mixed([(0.5, basis_vector(2, 0)), (0.4, basis_vector(2, 1))])

    def test_unnormalized_component(self) -> None:
        """Every component must be a unit vector."""
        with pytest.raises(ValidationError, match="not normalized"):
            InitialState.pure([1.0, 1.0])

    def test_component_dimensions_agree(self) -> None:
        """Components must share a dimension."""
        with pytest.raises(ValidationError, match="different dimensions"):
            InitialState.mixed([(0.5, basis_vector(2, 0)), (0.5, basis_vector(3, 0))])


class TestValidateChain:
    """Tests for validate_chain and ensure_valid."""

    def test_valid_chain(self, hadamard_chain: MeasurementChain) -> None:
        """The Hadamard chain has no issues."""
        report = validate_chain(hadamard_chain)
        assert report.ok
        assert str(report) == "valid"
        ensure_valid(hadamard_chain)

    def test_non_increasing_times(self, hadamard_chain: MeasurementChain) -> None:
        """Times must strictly increase."""
        chain = hadamard_chain.model_copy(update={"times": (0.0, 1.0, 1.0)})
        report = validate_chain(chain)
        assert [(i.location, i.code) for i in report.issues] == [
            ("times[2]", ErrorCode.INVALID_CHAIN)
        ]

    def test_non_unitary_step(self, hadamard_chain: MeasurementChain) -> None:
        """A non-unitary interval operator is reported with its deviation."""
        shear = np.array([[1.0, 0.1], [0.0, 1.0]])
        chain = hadamard_chain.model_copy(update={"unitaries": (hadamard(), shear)})
        (issue,) = validate_chain(chain).issues
        assert issue.location == "U[2]"
        assert issue.code is ErrorCode.NON_UNITARY
        assert "max deviation" in issue.message

    def test_dimension_mismatch(self, hadamard_chain: MeasurementChain) -> None:
        """Unitaries and observables must match the state dimension."""
        chain = hadamard_chain.model_copy(
            update={
                "unitaries": (identity(3), hadamard()),
                "observables": (
                    hadamard_chain.observables[0],
                    Observable.trivial(3),
                    hadamard_chain.observables[2],
                ),
            }
        )
        locations = [(i.location, i.code) for i in validate_chain(chain).issues]
        assert locations == [
            ("U[1]", ErrorCode.DIMENSION_MISMATCH),
            ("Q[1]", ErrorCode.DIMENSION_MISMATCH),
        ]

    def test_counts_must_match_times(self, hadamard_chain: MeasurementChain) -> None:
        """L + 1 times need L unitaries and L + 1 observables."""
        chain = hadamard_chain.model_copy(update={"unitaries": (hadamard(),)})
        locations = [i.location for i in validate_chain(chain).issues]
        assert locations == ["unitaries"]

    def test_degenerate_preparation_with_pure_state(
        self, hadamard_chain: MeasurementChain
    ) -> None:
        """A pure initial state needs a non-degenerate preparation."""
        observables = (Observable.trivial(2), *hadamard_chain.observables[1:])
        chain = hadamard_chain.model_copy(update={"observables": observables})
        (issue,) = validate_chain(chain).issues
        assert issue.location == "Q[0]"
        assert issue.code is ErrorCode.INVALID_CHAIN

    def test_state_outside_preparation_class(self, hadamard_chain: MeasurementChain) -> None:
        """The initial state must be an eigenstate of the preparation."""
        chain = hadamard_chain.model_copy(update={"initial": InitialState.pure(PLUS)})
        (issue,) = validate_chain(chain).issues
        assert issue.location == "initial[0]"
        assert issue.code is ErrorCode.INVALID_STATE

    def test_ensure_valid_raises(self, hadamard_chain: MeasurementChain) -> None:
        """ensure_valid turns the report into an error."""
        chain = hadamard_chain.model_copy(update={"times": (0.0, 2.0, 1.0)})
        with pytest.raises(InvalidInputError, match="Invalid measurement chain") as exc_info:
            ensure_valid(chain)
        assert exc_info.value.code is ErrorCode.INVALID_CHAIN

    def test_mixture_under_trivial_preparation(self, mixed_chain: MeasurementChain) -> None:
        """A mixture may use a degenerate preparation."""
        assert validate_chain(mixed_chain).ok
        assert mixed_chain.steps == 1
        assert mixed_chain.dim == 2


class TestCompositeSpace:
    """Tests for CompositeSpace."""

    def test_queries(self) -> None:
        """Labels, roles and dimensions are exposed."""
        space = CompositeSpace.of(("d", 3, "probe"), ("m", 4, "memory"), ("s", 2, "system"))
        assert space.dims == (3, 4, 2)
        assert space.dim == 24
        assert space.index_of("s") == 2
        assert space.indices_of(["s", "d"]) == (2, 0)
        assert space.local_dim(["d", "s"]) == 6
        assert space.labels_with_role(FactorRole.PROBE) == ("d",)

    def test_local_indices(self) -> None:
        """Local indices follow the requested factor order."""
        space = CompositeSpace.of(("a", 2, "system"), ("b", 3, "system"))
        # composite index 5 is |a=1, b=2>
        assert space.local_indices(["a"])[5] == 1
        assert space.local_indices(["b"])[5] == 2
        assert space.local_indices(["b", "a"])[5] == 2 * 2 + 1

    def test_duplicate_labels(self) -> None:
        """Factor labels must be unique."""
        with pytest.raises(ValidationError, match="Duplicate factor labels"):
            CompositeSpace.of(("s", 2, "system"), ("s", 3, "probe"))

    def test_unknown_label(self) -> None:
        """Looking up a missing label is an unknown_label error."""
        space = CompositeSpace.of(("s", 2, "system"))
        with pytest.raises(InvalidInputError, match="Unknown factor label") as exc_info:
            space.index_of("d")
        assert exc_info.value.code is ErrorCode.UNKNOWN_LABEL

    def test_capacity(self) -> None:
        """A 64 x 128 composite exceeds the default cap."""
        with pytest.raises(CapacityError):
            CompositeSpace.of(("a", 64, "system"), ("b", 128, "system"))

    def test_factor_dimension_minimum(self) -> None:
        """Factors have at least two states."""
        with pytest.raises(ValidationError):
            CompositeSpace.of(("s", 1, "system"))


class TestDistribution:
    """Tests for Distribution helpers."""

    @pytest.fixture
    def distribution(self) -> Distribution:
        return Distribution(
            axes=(("a", "b"), ("x", "y", "z")),
            names=("first", "second"),
            probabilities={(0, 0): 0.5, (0, 2): 0.25, (1, 1): 0.25 + 1e-13, (1, 2): -1e-13},
        )

    def test_lookup(self, distribution: Distribution) -> None:
        """Label tuples map to probabilities; unlisted tuples are 0."""
        assert distribution.probability_of(["a", "z"]) == 0.25
        assert distribution.probability_of(["b", "x"]) == 0.0
        assert distribution.total() == pytest.approx(1.0)

    def test_sorted_items(self, distribution: Distribution) -> None:
        """Entries sort by label tuple."""
        keys = [labels for labels, _ in distribution.sorted_items()]
        assert keys == [("a", "x"), ("a", "z"), ("b", "y"), ("b", "z")]

    def test_clamped(self, distribution: Distribution) -> None:
        """Rounding-level negatives become 0."""
        assert distribution.clamped().probability_of(["b", "z"]) == 0.0

    def test_marginal(self, distribution: Distribution) -> None:
        """Summing out the first axis keeps the second axis name."""
        marginal = distribution.marginal([1])
        assert marginal.names == ("second",)
        assert marginal.probability_of(["z"]) == pytest.approx(0.25)
        assert marginal.probability_of(["x"]) == 0.5

    def test_marginal_out_of_range(self, distribution: Distribution) -> None:
        """Axes beyond the distribution are rejected."""
        with pytest.raises(InvalidInputError) as exc_info:
            distribution.marginal([2])
        assert exc_info.value.code is ErrorCode.INDEX_OUT_OF_RANGE

    def test_max_abs_difference(self, distribution: Distribution) -> None:
        """Missing entries count as 0."""
        other = Distribution(axes=distribution.axes, probabilities={(0, 0): 0.5})
        assert distribution.max_abs_difference(other) == pytest.approx(0.25)

    def test_default_axis_names(self) -> None:
        """Unnamed axes are t0, t1, ..."""
        assert Distribution(axes=(("a",), ("b",))).axis_names == ("t0", "t1")

    def test_key_out_of_range(self) -> None:
        """Keys must index into their axes."""
        with pytest.raises(ValidationError, match="out of range"):
            Distribution(axes=(("a",),), probabilities={(1,): 1.0})
