"""Dense complex linear algebra over small Hilbert spaces.

Index convention (used everywhere in qchain): composite spaces are big-endian.
The left-most factor is the slowest index, so for factor dimensions
(d_0, d_1, ..., d_k) the basis state |i_0 i_1 ... i_k> sits at flat index
((i_0 * d_1 + i_1) * d_2 + i_2) ... This is exactly the ordering produced by
``numpy.kron``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from typing import TYPE_CHECKING, Any, TypeAlias

import numpy as np
import numpy.typing as npt
from scipy import linalg

from qchain.config import resolve_dim_cap
from qchain.constants import NORMALIZATION_TOLERANCE
from qchain.errors import CapacityError, ErrorCode, InvalidInputError

if TYPE_CHECKING:
    from qchain.models.space import CompositeSpace

CVector: TypeAlias = npt.NDArray[np.complex128]
COperator: TypeAlias = npt.NDArray[np.complex128]


def _frozen(array: npt.NDArray[Any]) -> npt.NDArray[np.complex128]:
    result = np.array(array, dtype=np.complex128)
    result.setflags(write=False)
    return result


def as_vector(data: Any) -> CVector:
    """
    Coerce data to a read-only complex vector.

    Raises:
        InvalidInputError: If the data is not a finite one-dimensional array.
    """
    try:
        array = np.array(data, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(
            f"Cannot interpret value as a complex vector: {e}",
            code=ErrorCode.DIMENSION_MISMATCH,
        ) from e
    if array.ndim != 1 or array.size == 0:
        raise InvalidInputError(
            f"Expected a non-empty vector, got shape {array.shape}",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    if not np.all(np.isfinite(array)):
        raise InvalidInputError("Vector has non-finite entries", code=ErrorCode.INVALID_STATE)
    return _frozen(array)


def as_operator(data: Any) -> COperator:
    """
    Coerce data to a read-only square complex matrix.

    Raises:
        InvalidInputError: If the data is not a finite square matrix.
    """
    try:
        array = np.array(data, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(
            f"Cannot interpret value as a complex matrix: {e}",
            code=ErrorCode.DIMENSION_MISMATCH,
        ) from e
    if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] == 0:
        raise InvalidInputError(
            f"Expected a square matrix, got shape {array.shape}",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    if not np.all(np.isfinite(array)):
        raise InvalidInputError("Matrix has non-finite entries", code=ErrorCode.DIMENSION_MISMATCH)
    return _frozen(array)


def _check_capacity(dim: int, dim_cap: int | None) -> None:
    cap = resolve_dim_cap(dim_cap)
    if dim > cap:
        raise CapacityError(f"Composite dimension {dim} exceeds the cap of {cap}")


def tensor_product(
    a: npt.ArrayLike, b: npt.ArrayLike, *, dim_cap: int | None = None
) -> npt.NDArray[np.complex128]:
    """
    Kronecker product of two vectors or two operators.

    The left operand is the slow (most significant) index.

    Args:
        a: Left vector or operator.
        b: Right vector or operator, same kind as ``a``.
        dim_cap: Capacity override; defaults to QCHAIN_DIM_CAP or 4096.

    Returns:
        Read-only product of dimension dim(a) * dim(b).

    Raises:
        InvalidInputError: If the operands are of different kinds.
        CapacityError: If the product dimension exceeds the cap.
    """
    left = np.asarray(a, dtype=np.complex128)
    right = np.asarray(b, dtype=np.complex128)
    if left.ndim != right.ndim or left.ndim not in (1, 2):
        raise InvalidInputError(
            "tensor_product needs two vectors or two operators",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    _check_capacity(left.shape[0] * right.shape[0], dim_cap)
    return _frozen(np.kron(left, right))


def tensor_all(
    items: Sequence[npt.ArrayLike], *, dim_cap: int | None = None
) -> npt.NDArray[np.complex128]:
    """Kronecker product of several operands, left to right."""
    if not items:
        raise InvalidInputError("tensor_all needs at least one operand")
    result = np.asarray(items[0], dtype=np.complex128)
    for item in items[1:]:
        result = tensor_product(result, item, dim_cap=dim_cap)
    return _frozen(result)


def _space_dims(space: CompositeSpace | Sequence[int]) -> tuple[int, ...]:
    dims = getattr(space, "dims", None)
    if dims is not None:
        return tuple(dims)
    return tuple(int(d) for d in space)  # type: ignore[union-attr]


def embed_operator(
    op: npt.ArrayLike,
    factor_index: int | Sequence[int],
    space: CompositeSpace | Sequence[int],
    *,
    dim_cap: int | None = None,
) -> COperator:
    """
    Lift an operator on one or several factors to the whole composite.

    Args:
        op: Operator on the named factors, ordered as ``factor_index`` lists them.
        factor_index: A factor position or an ordered sequence of positions.
        space: CompositeSpace or plain list of factor dimensions.
        dim_cap: Capacity override.

    Returns:
        op on the named factors, identity elsewhere, in the composite's factor order.

    Raises:
        InvalidInputError: If a factor index is out of range, repeated, or the
            operator dimension does not match the named factors.
        CapacityError: If the composite dimension exceeds the cap.
    """
    dims = _space_dims(space)
    targets = (factor_index,) if isinstance(factor_index, int) else tuple(factor_index)
    if not targets:
        raise InvalidInputError("No target factor given", code=ErrorCode.INDEX_OUT_OF_RANGE)
    for index in targets:
        if not 0 <= index < len(dims):
            raise InvalidInputError(
                f"Factor index {index} out of range for {len(dims)} factors",
                code=ErrorCode.INDEX_OUT_OF_RANGE,
            )
    if len(set(targets)) != len(targets):
        raise InvalidInputError(
            f"Repeated factor index in {targets}", code=ErrorCode.INDEX_OUT_OF_RANGE
        )

    matrix = np.asarray(op, dtype=np.complex128)
    local_dim = math.prod(dims[i] for i in targets)
    if matrix.shape != (local_dim, local_dim):
        raise InvalidInputError(
            f"Operator of shape {matrix.shape} does not act on factors {targets} "
            f"(dimension {local_dim})",
            code=ErrorCode.DIMENSION_MISMATCH,
        )

    total = math.prod(dims)
    _check_capacity(total, dim_cap)

    rest = [i for i in range(len(dims)) if i not in targets]
    order = list(targets) + rest
    full = np.kron(matrix, np.eye(total // local_dim, dtype=np.complex128))

    # full acts on factors in `order`; permute axes back to natural order
    n = len(dims)
    tensor = full.reshape([dims[i] for i in order] * 2)
    inverse = np.argsort(order)
    axes = [int(k) for k in inverse] + [n + int(k) for k in inverse]
    return _frozen(tensor.transpose(axes).reshape(total, total))


def unitarity_deviation(u: npt.ArrayLike) -> float:
    """Largest entry of |U†U − I|."""
    matrix = np.asarray(u, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return math.inf
    product = matrix.conj().T @ matrix
    return float(np.max(np.abs(product - np.eye(matrix.shape[0]))))


def adjoint_check(u: npt.ArrayLike, tol: float = 1e-10) -> bool:
    """True iff the max entry of |U†U − I| is below tol."""
    return unitarity_deviation(u) < tol


def haar_random_unitary(dim: int, seed: int) -> COperator:
    """
    Haar-distributed unitary, deterministic given the seed.

    A complex Ginibre matrix is QR-decomposed and each column of Q is
    multiplied by the phase of the matching diagonal entry of R.

    Raises:
        InvalidInputError: If dim < 1.
    """
    if dim < 1:
        raise InvalidInputError(f"dim must be >= 1, got {dim}", code=ErrorCode.DIMENSION_MISMATCH)
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = linalg.qr(z)
    diagonal = np.diagonal(r)
    phases = diagonal / np.abs(diagonal)
    return _frozen(q * phases)


def basis_vector(dim: int, index: int) -> CVector:
    """Computational basis vector |index> of dimension dim."""
    if not 0 <= index < dim:
        raise InvalidInputError(
            f"Basis index {index} out of range for dimension {dim}",
            code=ErrorCode.INDEX_OUT_OF_RANGE,
        )
    vector = np.zeros(dim, dtype=np.complex128)
    vector[index] = 1.0
    return _frozen(vector)


def ket_projector(vector: npt.ArrayLike) -> COperator:
    """Rank-one projector |v><v| (v is used as given, not normalized)."""
    v = np.asarray(vector, dtype=np.complex128)
    return _frozen(np.outer(v, v.conj()))


def normalized(vector: npt.ArrayLike, *, tol: float = NORMALIZATION_TOLERANCE) -> CVector:
    """
    Return the vector, checking that it has unit norm.

    Raises:
        InvalidInputError: If the norm differs from 1 by more than tol.
    """
    v = as_vector(vector)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise InvalidInputError(
            f"State is not normalized (norm {norm:.15g})", code=ErrorCode.INVALID_STATE
        )
    return v


def complete_basis(vector: npt.ArrayLike) -> COperator:
    """
    Unitary whose first column is the given normalized vector.

    Computational basis vectors give a permutation matrix (up to the phase of
    the vector); anything else is completed by QR of [v | I].
    """
    v = normalized(vector)
    dim = v.shape[0]
    magnitudes = np.abs(v)
    hot = int(np.argmax(magnitudes))
    if abs(magnitudes[hot] - 1.0) < NORMALIZATION_TOLERANCE:
        order = [hot] + [i for i in range(dim) if i != hot]
        basis = np.eye(dim, dtype=np.complex128)[:, order]
        basis[:, 0] = v
        return _frozen(basis)
    q, _ = linalg.qr(np.column_stack([v, np.eye(dim, dtype=np.complex128)]))
    basis = np.array(q[:, :dim], dtype=np.complex128)
    basis[:, 0] = v
    return _frozen(basis)


def hadamard() -> COperator:
    """The 2x2 Hadamard gate."""
    return _frozen(np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2))


def pauli_x() -> COperator:
    """The 2x2 bit flip."""
    return _frozen(np.array([[0.0, 1.0], [1.0, 0.0]]))


def rotation(theta: float) -> COperator:
    """Real rotation with entries cos(theta), -sin(theta) / sin(theta), cos(theta)."""
    c, s = math.cos(theta), math.sin(theta)
    return _frozen(np.array([[c, -s], [s, c]]))


def identity(dim: int) -> COperator:
    """Identity of the given dimension."""
    return _frozen(np.eye(dim))


def shift_operator(dim: int, steps: int, active: int | None = None) -> COperator:
    """
    Modular shift |j> -> |(j + steps) mod active> on the first ``active`` states.

    States with index >= active are left alone.
    """
    active = dim if active is None else active
    if not 1 <= active <= dim:
        raise InvalidInputError(
            f"Active block {active} does not fit dimension {dim}",
            code=ErrorCode.DIMENSION_MISMATCH,
        )
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(active):
        matrix[(j + steps) % active, j] = 1.0
    for j in range(active, dim):
        matrix[j, j] = 1.0
    return _frozen(matrix)
