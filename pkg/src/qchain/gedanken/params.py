"""Parameters of the two-observer experiments and the system amplitudes they induce."""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qchain.constants import NORMALIZATION_TOLERANCE, UNITARITY_TOLERANCE
from qchain.hilbert import (
    CVector,
    basis_vector,
    hadamard,
    haar_random_unitary,
    identity,
    unitarity_deviation,
)
from qchain.models._arrays import ComplexScalar, OperatorArray, VectorArray


class TwoObserverParams(BaseModel):
    """
    System dynamics, observer bases and W's composite-basis mixing.

    ``f_basis`` and ``w_basis`` hold the eigenstates s^F_1, s^F_2 and
    s^W_1, s^W_2 as columns. ``u_f`` evolves the system up to F's coupling,
    ``u_w`` from F's coupling to W's.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: ComplexScalar
    beta: ComplexScalar
    s0: VectorArray = Field(default_factory=lambda: basis_vector(2, 0))
    u_f: OperatorArray = Field(default_factory=lambda: identity(2))
    u_w: OperatorArray = Field(default_factory=lambda: identity(2))
    f_basis: OperatorArray = Field(default_factory=lambda: identity(2))
    w_basis: OperatorArray = Field(default_factory=lambda: identity(2))

    @model_validator(mode="after")
    def validate_params(self) -> TwoObserverParams:
        weight = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(weight - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {weight:.15g}, expected 1")
        if self.s0.shape != (2,):
            raise ValueError(f"s0 must be a two-level state, got shape {self.s0.shape}")
        norm = float(np.linalg.norm(self.s0))
        if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"s0 is not normalized (norm {norm:.15g})")
        for name in ("u_f", "u_w"):
            matrix = getattr(self, name)
            deviation = unitarity_deviation(matrix)
            if matrix.shape != (2, 2) or deviation >= UNITARITY_TOLERANCE:
                raise ValueError(f"{name} must be a 2x2 unitary (max deviation {deviation:.3e})")
        for name in ("f_basis", "w_basis"):
            matrix = getattr(self, name)
            deviation = unitarity_deviation(matrix)
            if matrix.shape != (2, 2) or deviation > NORMALIZATION_TOLERANCE:
                raise ValueError(
                    f"{name} must be an orthonormal pair (max deviation {deviation:.3e})"
                )
        return self

    @property
    def f_states(self) -> tuple[CVector, CVector]:
        return self.f_basis[:, 0], self.f_basis[:, 1]

    @property
    def w_states(self) -> tuple[CVector, CVector]:
        return self.w_basis[:, 0], self.w_basis[:, 1]


class SystemAmplitudes(BaseModel):
    """A_1..A_4: W-basis amplitude times F-basis amplitude along each system path."""

    model_config = ConfigDict(frozen=True)

    a1: complex
    a2: complex
    a3: complex
    a4: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.a1, self.a2, self.a3, self.a4)

    def total_weight(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.as_tuple()))


def _element(bra: npt.ArrayLike, op: npt.ArrayLike, ket: npt.ArrayLike) -> complex:
    return complex(np.vdot(np.asarray(bra), np.asarray(op) @ np.asarray(ket)))


def system_amplitudes(params: TwoObserverParams) -> SystemAmplitudes:
    """
    A_1 = <w1|U_W|f1><f1|U_F|s0>, A_2 = <w1|U_W|f2><f2|U_F|s0>,
    A_3 = <w2|U_W|f1><f1|U_F|s0>, A_4 = <w2|U_W|f2><f2|U_F|s0>.
    """
    f1, f2 = params.f_states
    w1, w2 = params.w_states
    c1 = _element(f1, params.u_f, params.s0)
    c2 = _element(f2, params.u_f, params.s0)
    return SystemAmplitudes(
        a1=_element(w1, params.u_w, f1) * c1,
        a2=_element(w1, params.u_w, f2) * c2,
        a3=_element(w2, params.u_w, f1) * c1,
        a4=_element(w2, params.u_w, f2) * c2,
    )


def phi_vectors(params: TwoObserverParams) -> tuple[CVector, CVector, CVector, CVector]:
    """
    W's four composite eigenstates on (F probe, system), F probe of dimension 3.

    φ1 = α|d1 w1> + β|d2 w2>,  φ2 = β*|d1 w1> − α*|d2 w2>,
    φ3 = α|d2 w1> + β|d1 w2>,  φ4 = β*|d2 w1> − α*|d1 w2>.
    """
    w1, w2 = params.w_states
    d1, d2 = basis_vector(3, 1), basis_vector(3, 2)
    alpha, beta = params.alpha, params.beta
    return (
        alpha * np.kron(d1, w1) + beta * np.kron(d2, w2),
        np.conj(beta) * np.kron(d1, w1) - np.conj(alpha) * np.kron(d2, w2),
        alpha * np.kron(d2, w1) + beta * np.kron(d1, w2),
        np.conj(beta) * np.kron(d2, w1) - np.conj(alpha) * np.kron(d1, w2),
    )


def hadamard_params() -> TwoObserverParams:
    """U_F = H, U_W = I, α = β = 1/√2, computational bases, s0 = |0>."""
    amplitude = 1 / math.sqrt(2)
    return TwoObserverParams(alpha=amplitude, beta=amplitude, u_f=hadamard())


def random_two_observer_params(seed: int) -> TwoObserverParams:
    """Haar dynamics and bases, random α, β and s0; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(4)
    mix = complex(raw[0], raw[1]), complex(raw[2], raw[3])
    scale = math.sqrt(abs(mix[0]) ** 2 + abs(mix[1]) ** 2)
    state = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return TwoObserverParams(
        alpha=mix[0] / scale,
        beta=mix[1] / scale,
        s0=state / np.linalg.norm(state),
        u_f=haar_random_unitary(2, seed * 4 + 1),
        u_w=haar_random_unitary(2, seed * 4 + 2),
        f_basis=haar_random_unitary(2, seed * 4 + 3),
        w_basis=haar_random_unitary(2, seed * 4 + 4),
    )
