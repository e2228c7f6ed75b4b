"""Wave-particle duality observables and entanglement criteria for small quantum systems."""
from .errors import QdualError
from .verdict import CriterionVerdict

__version__ = "0.1.0"

__all__ = ["CriterionVerdict", "QdualError", "__version__"]
