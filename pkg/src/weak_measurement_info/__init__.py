"""Information content of sequential weak qubit measurements."""

from .app import create_app
from .info_metrics import estimate_mi, exact_mi
from .measurement_models import build_kraus_set
from .trajectory import Prior

__all__ = ["Prior", "build_kraus_set", "create_app", "estimate_mi", "exact_mi"]
