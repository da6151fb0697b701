from .canonicalize_handler import CanonicalizeHandler
from .equiv_handler import EquivHandler
from .symmetry_handler import SymmetryMapHandler
from .selftest_handler import SelftestHandler
