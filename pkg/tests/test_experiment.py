import numpy as np
import pytest

from eemimo.channel import generate_channels
from eemimo.errors import ValidationError
from eemimo.experiment import (CSV_HEADER, ExperimentConfig, dumps_config,
                               loads_config, run_scheme, run_sweep, solve_single,
                               sweep_to_csv, trial_seed)
from eemimo.power import energy_efficiency

CONFIG = """
# tiny distance sweep
[experiment]
scenario = distance-sweep
sweep_values = 0.5, 2.0
M = 3
N = 1
K = 2
schemes = ee-exh-as, ee-norm-as, ee-wo-as, se
trials = 2
seed = 4
"""


def test_config_parse_and_canonical_roundtrip():
    cfg = loads_config(CONFIG)
    assert cfg.sweep_values == (0.5, 2.0) and cfg.M == 3 and cfg.trials == 2
    assert cfg.W == 5e6 and cfg.noise_dbm == -110.0
    assert loads_config(dumps_config(cfg)) == cfg
    assert dumps_config(loads_config(dumps_config(cfg))) == dumps_config(cfg)


@pytest.mark.parametrize('text, match', [
    ('[other]\nM = 2\n', 'missing'),
    ('[experiment]\nm = 2\n', "unknown key 'm'"),
    ('[experiment]\nM = two\n', "bad value for 'M'"),
    ('[experiment]\nscenario = fig9\n', 'unknown scenario'),
    ('[experiment]\nschemes = fastest\n', 'unknown scheme'),
    ('[experiment]\ntrials = 0\n', 'trials'),
    ('[experiment]\nscenario = distance-sweep\nsweep_values = 2, 1\n', 'increasing'),
    ('[experiment]\nscenario = antenna-sweep\nsweep_values = 1.5, 2\n', 'integers'),
    ('[experiment]\nscenario = user-sweep\n', 'needs sweep_values'),
    ('[experiment\n', 'string'),
])
def test_config_errors(text, match):
    with pytest.raises(ValidationError, match=match):
        loads_config(text)


def test_trial_seed_depends_on_every_coordinate():
    seeds = {trial_seed(1, i, t) for i in range(3) for t in range(3)}
    assert len(seeds) == 9
    assert trial_seed(1, 0, 0) != trial_seed(2, 0, 0)
    assert trial_seed(5, 1, 2) == trial_seed(5, 1, 2)


def test_sweep_rows_and_csv():
    cfg = loads_config(CONFIG)
    rows = run_sweep(cfg)
    assert [(r['sweep_var'], r['scheme']) for r in rows] == [
        (v, s) for v in cfg.sweep_values for s in cfg.schemes]
    text = sweep_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ('sweep_var,scheme,mean_ee_bits_per_joule,mean_rate_bps_hz,'
                        'mean_active_antennas,feasible_fraction,n_trials')
    assert tuple(lines[0].split(',')) == CSV_HEADER
    assert len(lines) == 1 + 8
    assert 'np.float64' not in text
    by = {(r['sweep_var'], r['scheme']): r for r in rows}
    for v in cfg.sweep_values:
        assert by[v, 'se']['mean_rate_bps_hz'] >= by[v, 'ee-wo-as']['mean_rate_bps_hz'] * (1 - 1e-9)
        ee = [by[v, s]['mean_ee_bits_per_joule'] for s in cfg.schemes]
        assert all(a >= b - 1e-9 for a, b in zip(ee, ee[1:]))


def test_sweep_is_deterministic():
    cfg = loads_config(CONFIG.replace('trials = 2', 'trials = 1'))
    assert sweep_to_csv(run_sweep(cfg)) == sweep_to_csv(run_sweep(cfg))


def test_schemes_share_channels(monkeypatch):
    import eemimo.experiment as ex
    seen = []
    real = ex.run_scheme

    def spy(scheme, H, model, delta=1e-6):
        seen.append((scheme, H.H.tobytes()))
        return real(scheme, H, model, delta)

    monkeypatch.setattr(ex, 'run_scheme', spy)
    cfg = ExperimentConfig(scenario='single', M=2, N=1, K=1, trials=2,
                           schemes=('ee-wo-as', 'se'))
    ex.run_sweep(cfg)
    assert seen[0][1] == seen[1][1] and seen[2][1] == seen[3][1]
    assert seen[0][1] != seen[2][1]


def test_infeasible_rows_report_fraction():
    cfg = ExperimentConfig(scenario='single', M=2, N=1, K=1, trials=2,
                           c_min_bps_hz=1000.0, schemes=('ee-wo-as',))
    (row,) = run_sweep(cfg)
    assert row['feasible_fraction'] == 0.0


def test_antenna_and_user_sweeps():
    cfg = ExperimentConfig(scenario='antenna-sweep', sweep_values=(1.0, 2.0), N=1, K=1,
                           trials=1, schemes=('ee-norm-as',))
    rows = run_sweep(cfg)
    assert [r['mean_active_antennas'] <= r['sweep_var'] for r in rows] == [True, True]
    cfg = ExperimentConfig(scenario='user-sweep', sweep_values=(1.0, 3.0), M=2, N=1,
                           trials=1, schemes=('se',))
    assert len(run_sweep(cfg)) == 2


def test_solve_single_report_recomputes():
    H = generate_channels(0, 3, 2, 2, 1.0)
    cfg = ExperimentConfig()
    rep = solve_single(H, cfg, 'ee-norm-as')
    m = cfg.power_model()
    assert rep['ee'] == pytest.approx(
        energy_efficiency(rep['sum_rate'], rep['sum_power'], rep['active_antennas'], m),
        rel=1e-12)
    assert rep['active_antennas'] == len(rep['active_set'])
    with pytest.raises(ValidationError):
        solve_single(H, cfg, 'greedy')


def test_run_scheme_rejects_unknown():
    with pytest.raises(ValidationError):
        run_scheme('x', generate_channels(0, 1, 1, 1, 1.0), ExperimentConfig().power_model())
