"""Affine base-station power model and energy-efficiency arithmetic."""
from dataclasses import dataclass, replace
import math

from .errors import DomainError, ValidationError

__all__ = ['PowerModel', 'total_power', 'energy_efficiency']


@dataclass(frozen=True)
class PowerModel:
    """Power consumption constants and the two operating constraints.

    Total consumed power is ``P / eta + M_a * p_dyn + p_sta`` for transmit
    power ``P`` radiated from ``M_a`` active antennas. All values are watts,
    except ``c_min`` (bits/s) and ``eta`` (dimensionless).
    """
    eta: float = 0.38
    p_dyn: float = 83.0
    p_sta: float = 45.5
    p_max: float = 10.0 ** ((46.0 - 30.0) / 10.0)
    c_min: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise ValidationError(f"eta must lie in (0, 1], got {self.eta}")
        if not self.p_dyn >= 0.0:
            raise ValidationError(f"p_dyn must be >= 0, got {self.p_dyn}")
        if not self.p_sta >= 0.0:
            raise ValidationError(f"p_sta must be >= 0, got {self.p_sta}")
        if not (self.p_max > 0.0 and math.isfinite(self.p_max)):
            raise ValidationError(f"p_max must be positive, got {self.p_max}")
        if not (self.c_min >= 0.0 and math.isfinite(self.c_min)):
            raise ValidationError(f"c_min must be >= 0, got {self.c_min}")

    def circuit_power(self, M_a):
        """Transmit-independent part ``M_a * p_dyn + p_sta``."""
        return M_a * self.p_dyn + self.p_sta

    def replace(self, **changes):
        return replace(self, **changes)


def total_power(P, M_a, model):
    if P < 0:
        raise ValidationError(f"transmit power must be >= 0, got {P}")
    if M_a < 0:
        raise ValidationError(f"active antenna count must be >= 0, got {M_a}")
    return P / model.eta + model.circuit_power(M_a)


def energy_efficiency(rate, P, M_a, model):
    """Bits per joule: ``rate / total_power(P, M_a, model)``."""
    if rate < 0:
        raise ValidationError(f"rate must be >= 0, got {rate}")
    denom = total_power(P, M_a, model)
    if denom <= 0.0:
        raise DomainError("total power is zero; energy efficiency undefined")
    return float(rate) / float(denom)
