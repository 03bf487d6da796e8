import pytest

from eemimo.errors import DomainError, ValidationError
from eemimo.power import PowerModel, energy_efficiency, total_power


def test_defaults_and_total_power_example():
    m = PowerModel()
    assert m.p_max == pytest.approx(39.81071705534972)
    # 10 W through the amplifier plus 4 antennas: 10/0.38 + 332 + 45.5
    assert total_power(10.0, 4, m) == pytest.approx(403.81578947368)
    assert total_power(m.p_max, 4, m) == pytest.approx(482.265, abs=1e-3)


def test_total_power_monotone():
    m = PowerModel()
    assert total_power(2.0, 3, m) > total_power(1.0, 3, m)
    assert total_power(1.0, 4, m) > total_power(1.0, 3, m)


def test_energy_efficiency_examples():
    m = PowerModel()
    assert energy_efficiency(0.0, 0.0, 4, m) == 0.0
    assert energy_efficiency(377.5e3, 0.0, 4, m) == pytest.approx(1000.0)
    with pytest.raises(DomainError):
        energy_efficiency(1.0, 0.0, 0, PowerModel(p_sta=0.0))


@pytest.mark.parametrize('kw', [dict(eta=0.0), dict(eta=1.5), dict(p_dyn=-1.0),
                                dict(p_sta=-1.0), dict(p_max=0.0), dict(c_min=-1.0)])
def test_invalid_model_rejected(kw):
    with pytest.raises(ValidationError):
        PowerModel(**kw)


def test_negative_inputs_rejected():
    m = PowerModel()
    with pytest.raises(ValidationError):
        total_power(-1.0, 1, m)
    with pytest.raises(ValidationError):
        energy_efficiency(-1.0, 1.0, 1, m)
