"""Energy-efficient transmit covariances and antenna selection for MIMO
broadcast channels, computed in the dual multiple-access channel."""
from .atas import SelectionResult, exhaustive_atas, norm_based_atas
from .capacity import bc_sum_rate, effective_channel, mac_sum_rate
from .channel import (AntennaSet, UserChannels, column_norm_order,
                      generate_channels, load_channels, restrict, save_channels)
from .errors import ConvergenceWarning, DomainError, NumericError, ValidationError
from .kernels import BACKEND
from .power import PowerModel, energy_efficiency, total_power
from .solver import (EESolution, ee_iterative_waterfilling, min_power_for_rate,
                     se_iterative_waterfilling, solve_constrained,
                     waterfill_ee_user)

__version__ = '0.1.0'
