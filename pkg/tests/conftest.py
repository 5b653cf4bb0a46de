"""Shared pytest fixtures for qchain tests."""

from __future__ import annotations

import copy
import math
import os
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from qchain.config import DIM_CAP_ENV, ENV_VAR_PATHS
from qchain.constants import ENV_PREFIX
from qchain.corpus import bundled_corpus_path
from qchain.hilbert import basis_vector, hadamard, identity
from qchain.histories import HistoryFamily, plus_state_family
from qchain.models import InitialState, MeasurementChain, Observable

# Qutrit Fourier matrix
OMEGA = np.exp(2j * math.pi / 3)
DFT3 = np.array([[OMEGA ** (j * k) for k in range(3)] for j in range(3)]) / math.sqrt(3)

COMPUTATIONAL_QUBIT: dict[str, Any] = {
    "classes": [{"label": "0", "states": [0]}, {"label": "1", "states": [1]}]
}


# ============================================================================
# Environment Isolation
# ============================================================================


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Run every test without QCHAIN_* overrides from the calling shell."""
    for name in [*ENV_VAR_PATHS, f"{ENV_PREFIX}_CONFIG", f"{ENV_PREFIX}_LOG_LEVEL"]:
        monkeypatch.delenv(name, raising=False)
    yield
    # the CLI exports the configured cap for the rest of the process
    os.environ.pop(DIM_CAP_ENV, None)


# ============================================================================
# Measurement Chains
# ============================================================================


@pytest.fixture
def hadamard_chain() -> MeasurementChain:
    """|0>, then H and a computational readout, twice."""
    readout = Observable.non_degenerate(identity(2), ["0", "1"])
    return MeasurementChain(
        times=(0.0, 1.0, 2.0),
        unitaries=(hadamard(), hadamard()),
        observables=(Observable.from_state(basis_vector(2, 0)), readout, readout),
        initial=InitialState.pure(basis_vector(2, 0)),
    )


@pytest.fixture
def degenerate_chain() -> MeasurementChain:
    """Qutrit Fourier steps around a degenerate {low: 0,1 / high: 2} readout."""
    return MeasurementChain(
        times=(0.0, 1.0, 2.0),
        unitaries=(DFT3, DFT3),
        observables=(
            Observable.from_state(basis_vector(3, 0)),
            Observable.computational(3, [("low", 0.0, [0, 1]), ("high", 1.0, [2])]),
            Observable.non_degenerate(identity(3), ["k0", "k1", "k2"]),
        ),
        initial=InitialState.pure(basis_vector(3, 0)),
    )


@pytest.fixture
def mixed_chain() -> MeasurementChain:
    """Mixture 3/4 |0> + 1/4 |1> under a trivial preparation, read out unchanged."""
    return MeasurementChain(
        times=(0.0, 1.0),
        unitaries=(identity(2),),
        observables=(
            Observable.trivial(2),
            Observable.non_degenerate(identity(2), ["0", "1"]),
        ),
        initial=InitialState.mixed([(0.75, basis_vector(2, 0)), (0.25, basis_vector(2, 1))]),
    )


@pytest.fixture
def dft3() -> np.ndarray:
    """Qutrit Fourier matrix."""
    return DFT3


# ============================================================================
# History Families
# ============================================================================


@pytest.fixture
def plus_family() -> HistoryFamily:
    """|+> read in the computational basis, then in the ± basis."""
    return plus_state_family()


# ============================================================================
# Scenario Documents
# ============================================================================


@pytest.fixture
def corpus_dir() -> Path:
    """Directory of the bundled corpus."""
    return bundled_corpus_path()


@pytest.fixture
def qubit_document() -> dict[str, Any]:
    """Minimal valid document: H on a qubit, then a computational readout."""
    return {
        "format_version": 1,
        "name": "qubit",
        "factors": [{"label": "s", "dim": 2}],
        "events": [
            {"kind": "unitary", "time": 0.5, "factors": ["s"], "matrix": {"builtin": "hadamard"}},
            {
                "kind": "observe",
                "time": 1.0,
                "factors": ["s"],
                "observable": copy.deepcopy(COMPUTATIONAL_QUBIT),
            },
        ],
    }


@pytest.fixture
def probe_document() -> dict[str, Any]:
    """Probe coupled to the qubit 0.6|0> + 0.8|1>, then read out on the probe."""
    return {
        "format_version": 1,
        "name": "probe",
        "factors": [
            {"label": "d", "dim": 3, "role": "probe"},
            {"label": "s", "dim": 2},
        ],
        "initial": {"kind": "product", "states": [{"factor": "s", "vector": [0.6, 0.8]}]},
        "events": [
            {
                "kind": "couple",
                "time": 1.0,
                "probe": "d",
                "targets": ["s"],
                "partition": copy.deepcopy(COMPUTATIONAL_QUBIT),
            },
            {
                "kind": "observe",
                "time": 2.0,
                "factors": ["d"],
                "observable": {
                    "classes": [
                        {"label": "d0", "states": [0]},
                        {"label": "d1", "states": [1]},
                        {"label": "d2", "states": [2]},
                    ]
                },
                "name": "D",
            },
        ],
    }
