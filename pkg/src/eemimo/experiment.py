"""Monte-Carlo sweeps and single-channel reports.

Configuration files are INI documents with one ``[experiment]`` section of
flat ``key = value`` pairs; list values are comma separated. Keys and their
defaults are those of :class:`ExperimentConfig`.
"""
import configparser
import csv
import io
import json
from dataclasses import dataclass, fields, replace

import numpy as np

from .atas import exhaustive_atas, norm_based_atas
from .channel import AntennaSet, dbm_to_watt, generate_channels
from .errors import ValidationError
from .power import PowerModel
from .solver import rate_max_solution, solve_constrained

__all__ = ['SCENARIOS', 'SCHEMES', 'CSV_HEADER', 'ExperimentConfig',
           'load_config', 'loads_config', 'dumps_config', 'trial_seed',
           'run_scheme', 'run_sweep', 'sweep_to_csv', 'solve_single']

SCENARIOS = {
    'distance-sweep': 'distance_km',
    'rate-constraint-sweep': 'c_min_bps_hz',
    'antenna-sweep': 'M',
    'user-sweep': 'K',
    'single': None,
}
SCHEMES = ('ee-exh-as', 'ee-norm-as', 'ee-wo-as', 'se')
CSV_HEADER = ('sweep_var', 'scheme', 'mean_ee_bits_per_joule', 'mean_rate_bps_hz',
              'mean_active_antennas', 'feasible_fraction', 'n_trials')


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = 'single'
    sweep_values: tuple = ()
    M: int = 4
    N: int = 2
    K: int = 2
    distance_km: float = 1.0
    W: float = 5e6
    noise_dbm: float = -110.0
    eta: float = 0.38
    p_dyn_w: float = 83.0
    p_sta_w: float = 45.5
    p_max_dbm: float = 46.0
    c_min_bps_hz: float = 0.0
    schemes: tuple = SCHEMES
    trials: int = 20
    seed: int = 0
    delta: float = 1e-6

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValidationError(
                f"unknown scenario {self.scenario!r}; expected one of {sorted(SCENARIOS)}")
        if not self.schemes:
            raise ValidationError("at least one scheme is required")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValidationError(f"unknown scheme {s!r}; expected one of {SCHEMES}")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        vals = self.sweep_values
        if self.scenario == 'single':
            if vals:
                raise ValidationError("scenario 'single' takes no sweep_values")
        elif not vals:
            raise ValidationError(f"scenario {self.scenario!r} needs sweep_values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValidationError("sweep_values must be strictly increasing")
        for name in ('M', 'N', 'K'):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if not self.distance_km > 0:
            raise ValidationError("distance_km must be positive")
        if self.scenario in ('antenna-sweep', 'user-sweep'):
            if any(int(v) != v or v < 1 for v in vals):
                raise ValidationError("antenna/user sweep values must be positive integers")
        self.power_model()  # validates the power constants

    def power_model(self, c_min_bps_hz=None):
        c = self.c_min_bps_hz if c_min_bps_hz is None else c_min_bps_hz
        return PowerModel(eta=self.eta, p_dyn=self.p_dyn_w, p_sta=self.p_sta_w,
                          p_max=dbm_to_watt(self.p_max_dbm), c_min=c * self.W)

    def at(self, value):
        """Copy of the config with the sweep variable set to ``value``."""
        key = SCENARIOS[self.scenario]
        if key is None:
            return self
        if key in ('M', 'K'):
            value = int(value)
        return replace(self, **{key: value})


_INT_KEYS = {'M', 'N', 'K', 'trials', 'seed'}
_FLOAT_KEYS = {'distance_km', 'W', 'noise_dbm', 'eta', 'p_dyn_w', 'p_sta_w',
               'p_max_dbm', 'c_min_bps_hz', 'delta'}


def loads_config(text, source='<string>'):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case sensitive (M vs m)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ValidationError(f"{source}: {exc}") from None
    if 'experiment' not in parser:
        raise ValidationError(f"{source}: missing [experiment] section")
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {}
    for key, raw in parser['experiment'].items():
        if key not in known:
            raise ValidationError(f"{source}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                kwargs[key] = int(raw)
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(raw)
            elif key == 'sweep_values':
                kwargs[key] = tuple(float(v) for v in raw.split(',') if v.strip())
            elif key == 'schemes':
                kwargs[key] = tuple(v.strip() for v in raw.split(',') if v.strip())
            else:
                kwargs[key] = raw.strip()
        except ValueError:
            raise ValidationError(f"{source}: bad value for {key!r}: {raw!r}") from None
    return ExperimentConfig(**kwargs)


def load_config(path):
    with open(path) as fh:
        return loads_config(fh.read(), source=str(path))


def dumps_config(cfg):
    """Canonical text form: every key, in declaration order."""
    lines = ['[experiment]']
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ', '.join(repr(x) if isinstance(x, float) else str(x) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f'{f.name} = {v}')
    return '\n'.join(lines) + '\n'


def trial_seed(seed, sweep_index, trial):
    """Per-trial channel seed shared by every scheme in a sweep cell."""
    ss = np.random.SeedSequence([int(seed), int(sweep_index), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_scheme(scheme, H, model, delta=1e-6):
    """Run one scheme; returns ``(solution, active_antenna_set)``."""
    if scheme == 'ee-exh-as':
        sel = exhaustive_atas(H, model, delta=delta)
        return sel.solution, sel.chosen
    if scheme == 'ee-norm-as':
        sel = norm_based_atas(H, model, delta=delta)
        return sel.solution, sel.chosen
    full = AntennaSet.full(H.M)
    if scheme == 'ee-wo-as':
        return solve_constrained(H, model, delta=delta), full
    if scheme == 'se':
        return rate_max_solution(H, model), full
    raise ValidationError(f"unknown scheme {scheme!r}")


def run_sweep(cfg, progress=None):
    """Average every scheme over ``cfg.trials`` channel draws per sweep point.

    Returns a list of row dicts keyed by :data:`CSV_HEADER`. Rows come in
    sweep-value order, then in the order of ``cfg.schemes``. Sums are
    accumulated in trial order so results do not depend on scheduling.
    """
    points = cfg.sweep_values if cfg.scenario != 'single' else (None,)
    rows = []
    for idx, value in enumerate(points):
        point = cfg.at(value)
        model = point.power_model()
        acc = {s: [0.0, 0.0, 0.0, 0] for s in cfg.schemes}
        for t in range(cfg.trials):
            H = generate_channels(trial_seed(cfg.seed, idx, t), point.M, point.N,
                                  point.K, point.distance_km, W=point.W,
                                  noise_dbm=point.noise_dbm)
            for s in cfg.schemes:
                sol, T = run_scheme(s, H, model, delta=cfg.delta)
                a = acc[s]
                a[0] += sol.ee
                a[1] += sol.sum_rate / point.W
                a[2] += len(T)
                a[3] += int(sol.feasible)
            if progress is not None:
                progress(idx, t)
        sweep_var = point.distance_km if value is None else value
        for s in cfg.schemes:
            a = acc[s]
            rows.append({
                'sweep_var': float(sweep_var),
                'scheme': s,
                'mean_ee_bits_per_joule': a[0] / cfg.trials,
                'mean_rate_bps_hz': a[1] / cfg.trials,
                'mean_active_antennas': a[2] / cfg.trials,
                'feasible_fraction': a[3] / cfg.trials,
                'n_trials': cfg.trials,
            })
    return rows


def sweep_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([repr(float(r[k])) if isinstance(r[k], float) else r[k]
                    for k in CSV_HEADER])
    return buf.getvalue()


def solve_single(H, cfg, scheme):
    """JSON-ready report for one channel realisation and one scheme."""
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    cfg = replace(cfg, W=H.W)
    model = cfg.power_model()
    sol, T = run_scheme(scheme, H, model, delta=cfg.delta)
    report = {'scheme': scheme, 'active_set': list(T)}
    report.update(sol.to_dict())
    return report


def report_to_json(report):
    return json.dumps(report, indent=1, sort_keys=False)
