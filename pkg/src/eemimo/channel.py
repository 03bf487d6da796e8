"""Rayleigh-fading channels with distance pathloss, antenna-set restriction
and a JSON dump format.

Channels are held as a complex array ``H`` of shape ``(K, N, M)``: one
``N x M`` block per user, columns indexed by transmit antenna. Antenna sets
are 1-based, matching the usual ``{1, ..., M}`` numbering.
"""
from dataclasses import dataclass
import json
import math

import numpy as np

from .errors import ValidationError

__all__ = ['UserChannels', 'AntennaSet', 'pathloss_db', 'dbm_to_watt',
           'generate_channels', 'restrict', 'column_norm_order',
           'dumps_channels', 'loads_channels', 'save_channels',
           'load_channels']


def pathloss_db(distance_km):
    """Macro-cell pathloss ``128.1 + 37.6 log10(d)`` in dB, ``d`` in km."""
    if not distance_km > 0:
        raise ValidationError(f"distance must be positive, got {distance_km}")
    return 128.1 + 37.6 * math.log10(distance_km)


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True, eq=False)
class UserChannels:
    """Per-user channel matrices plus the link constants.

    Attributes
    ----------
    H : np.ndarray, shape (K, N, M), complex
        ``H[i]`` is the channel from the transmit antennas to user ``i``.
    sigma2 : float
        Noise power per receive antenna, in watts.
    W : float
        Bandwidth in Hz.
    """
    H: np.ndarray
    sigma2: float
    W: float

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        if H.ndim != 3 or 0 in H.shape:
            raise ValidationError(
                f"H must have shape (K, N, M) with positive sizes, got {H.shape}")
        if not np.all(np.isfinite(H)):
            raise ValidationError("H contains non-finite entries")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise ValidationError(f"sigma2 must be positive, got {self.sigma2}")
        if not (self.W > 0 and math.isfinite(self.W)):
            raise ValidationError(f"W must be positive, got {self.W}")
        object.__setattr__(self, 'H', H)
        object.__setattr__(self, 'sigma2', float(self.sigma2))
        object.__setattr__(self, 'W', float(self.W))

    @property
    def K(self):
        return self.H.shape[0]

    @property
    def N(self):
        return self.H.shape[1]

    @property
    def M(self):
        return self.H.shape[2]

    def stacked(self):
        """The ``NK x M`` matrix with the user blocks stacked vertically."""
        return self.H.reshape(self.K * self.N, self.M)

    def with_bandwidth(self, W):
        return UserChannels(self.H, self.sigma2, W)

    def __eq__(self, other):
        if not isinstance(other, UserChannels):
            return NotImplemented
        return (self.sigma2 == other.sigma2 and self.W == other.W
                and self.H.shape == other.H.shape
                and bool(np.array_equal(self.H, other.H)))


class AntennaSet(tuple):
    """Strictly increasing tuple of 1-based antenna indices."""

    def __new__(cls, indices, M=None):
        idx = tuple(int(i) for i in indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValidationError(
                f"antenna indices must be strictly increasing, got {idx}")
        if idx and idx[0] < 1:
            raise ValidationError(f"antenna indices are 1-based, got {idx}")
        if M is not None and idx and idx[-1] > M:
            raise ValidationError(f"antenna index {idx[-1]} exceeds M={M}")
        return super().__new__(cls, idx)

    @classmethod
    def full(cls, M):
        return cls(range(1, M + 1))

    @property
    def size(self):
        return len(self)

    def __repr__(self):
        return f"AntennaSet({list(self)})"


def _box_muller(rng, n):
    # Unit-variance circularly-symmetric complex Gaussians: the Box-Muller
    # pair (r cos t, r sin t) with r = sqrt(-2 ln u1), scaled by 1/sqrt(2).
    u = rng.random(2 * n)
    u1 = 1.0 - u[0::2]  # (0, 1], keeps log finite
    u2 = u[1::2]
    r = np.sqrt(-np.log(u1))
    theta = 2.0 * np.pi * u2
    return r * np.cos(theta) + 1j * r * np.sin(theta)


def generate_channels(seed, M, N, K, distance_km, W=5e6, noise_dbm=-110.0):
    """Draw i.i.d. Rayleigh channels with a common distance pathloss.

    Every entry of every ``H_i`` is CN(0, g) with
    ``g = 10^(-pathloss_db(d) / 10)``. Uniform variates come from numpy's
    PCG64 bit generator seeded with ``seed`` and are turned into Gaussians by
    Box-Muller, so a given seed yields the same matrices on every platform.
    """
    for name, v in (('M', M), ('N', N), ('K', K)):
        if int(v) != v or v < 1:
            raise ValidationError(f"{name} must be a positive integer, got {v}")
    gain = 10.0 ** (-pathloss_db(distance_km) / 10.0)
    rng = np.random.Generator(np.random.PCG64(seed))
    z = _box_muller(rng, K * N * M).reshape(K, N, M)
    return UserChannels(np.sqrt(gain) * z, dbm_to_watt(noise_dbm), W)


def restrict(H, T):
    """Keep only the transmit-antenna columns listed in ``T`` (1-based)."""
    T = AntennaSet(T)
    if not T:
        raise ValidationError("cannot restrict to an empty antenna set")
    if T[-1] > H.M:
        raise ValidationError(f"antenna index {T[-1]} out of range for M={H.M}")
    cols = np.asarray(T, dtype=np.intp) - 1
    return UserChannels(H.H[:, :, cols], H.sigma2, H.W)


def column_norm_order(H):
    """1-based antenna indices sorted by decreasing column norm of the
    stacked channel; equal norms keep ascending index order."""
    norms = np.linalg.norm(H.stacked(), axis=0)
    order = np.argsort(-norms, kind='stable')
    return tuple(int(i) + 1 for i in order)


# --- dump / load ---------------------------------------------------------

def _to_pairs(A):
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def dumps_channels(H):
    """Serialise to JSON. Floats are written with ``repr`` (shortest
    round-trip form, at most 17 significant digits) so loading is bit-exact."""
    doc = {
        'M': H.M, 'N': H.N, 'K': H.K,
        'sigma2': H.sigma2, 'W': H.W,
        'H': [_to_pairs(Hi) for Hi in H.H],
    }
    return json.dumps(doc, indent=1)


def loads_channels(text, source='<string>'):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{source}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{source}: top level must be an object")
    for key in ('M', 'N', 'K', 'sigma2', 'W', 'H'):
        if key not in doc:
            raise ValidationError(f"{source}: missing field '{key}'")
    M, N, K = doc['M'], doc['N'], doc['K']
    for key, v in (('M', M), ('N', N), ('K', K)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ValidationError(f"{source}: field '{key}' must be a positive integer")
    mats = doc['H']
    if not isinstance(mats, list) or len(mats) != K:
        raise ValidationError(f"{source}: field 'H' must list K={K} matrices")
    H = np.empty((K, N, M), dtype=complex)
    for i, Hi in enumerate(mats):
        if not isinstance(Hi, list) or len(Hi) != N:
            raise ValidationError(f"{source}: H[{i}] must have N={N} rows")
        for r, row in enumerate(Hi):
            if not isinstance(row, list) or len(row) != M:
                raise ValidationError(f"{source}: H[{i}][{r}] must have M={M} entries")
            for c, z in enumerate(row):
                if (not isinstance(z, list) or len(z) != 2
                        or not all(isinstance(x, (int, float))
                                   and not isinstance(x, bool) for x in z)):
                    raise ValidationError(
                        f"{source}: H[{i}][{r}][{c}] must be a [re, im] number pair")
                H[i, r, c] = complex(z[0], z[1])
    for key in ('sigma2', 'W'):
        if not isinstance(doc[key], (int, float)) or isinstance(doc[key], bool):
            raise ValidationError(f"{source}: field '{key}' must be a number")
    return UserChannels(H, float(doc['sigma2']), float(doc['W']))


def save_channels(H, path):
    with open(path, 'w') as fh:
        fh.write(dumps_channels(H))
        fh.write('\n')


def load_channels(path):
    with open(path) as fh:
        return loads_channels(fh.read(), source=str(path))
