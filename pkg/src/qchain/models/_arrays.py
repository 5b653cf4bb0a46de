"""Pydantic field types for read-only numpy arrays and complex scalars."""

from __future__ import annotations

from typing import Annotated, Any

import numpy as np
from pydantic import BeforeValidator

from qchain.hilbert import as_operator, as_vector


def _as_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    return complex(value)


OperatorArray = Annotated[np.ndarray, BeforeValidator(as_operator)]
VectorArray = Annotated[np.ndarray, BeforeValidator(as_vector)]
ComplexScalar = Annotated[complex, BeforeValidator(_as_complex)]
