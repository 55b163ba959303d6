"""Modal quantum theory over prime fields: states, channels, possibility tables and their resolutions."""

from .field import FieldSpec, Scalar
from .linalg import Matrix
from .states import Bra, Ket, Measurement, StateSpace, Subspace

__all__ = ["FieldSpec", "Scalar", "Matrix", "StateSpace", "Ket", "Bra", "Subspace", "Measurement"]
__version__ = "0.1.0"
