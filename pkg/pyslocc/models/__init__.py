from .exactmat import Matrix, Scalar, SloccError
from .canon import CanonicalForm, TensorState
