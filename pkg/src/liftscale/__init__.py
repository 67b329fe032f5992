"""Local lift dependence scale and multi-resolution feature selection."""

from .discretize import QUINTILES, TERTILES, QuantileSpec, discretize_joint
from .distribution import JointTable, build_table, marginal_x, marginal_y
from .errors import LiftScaleError
from .metrics import Window, eta_global, eta_window, lift, mutual_information
from .search import SearchConfig, select_global, select_profile, select_window

__version__ = "0.1.0"
