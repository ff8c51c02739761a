"""Wave and Schrodinger states in spectral coefficients, their evolution and energies.

Wave states are stored as half-wave coefficients, so that

    u_nu(t) = exp(i t sqrt(lam_nu)) uplus_nu + exp(-i t sqrt(lam_nu)) uminus_nu

and the s-energy is ``sum lam^s (|uplus|^2 + |uminus|^2)``.
"""

from dataclasses import dataclass
import json

import numpy as np

from .rng import Xorshift64Star

__all__ = [
    "WaveState",
    "SchrodingerState",
    "wave_from_initial",
    "wave_initial_from_halfwave",
    "evaluate_wave",
    "energy",
    "schrodinger_norm",
    "schrodinger_norm_sq",
    "evaluate_schrodinger",
    "wave_trace",
    "schrodinger_trace",
    "random_wave_state",
    "random_schrodinger_state",
    "state_to_json",
    "state_from_json",
]


def _frozen(v):
    v = np.array(v, dtype=complex, copy=True).reshape(-1)
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class WaveState:
    """Half-wave coefficients of a wave solution.

    ``lambdas`` travels with the state so that evolution and energies do not
    need the model.
    """

    uplus: np.ndarray
    uminus: np.ndarray
    lambdas: np.ndarray

    def __post_init__(self):
        up, um = _frozen(self.uplus), _frozen(self.uminus)
        lam = np.array(self.lambdas, dtype=float, copy=True).reshape(-1)
        lam.setflags(write=False)
        if not (up.shape == um.shape == lam.shape):
            raise ValueError(f"length mismatch: uplus {up.shape}, uminus {um.shape}, lambdas {lam.shape}")
        object.__setattr__(self, "uplus", up)
        object.__setattr__(self, "uminus", um)
        object.__setattr__(self, "lambdas", lam)

    @property
    def n_modes(self):
        return self.lambdas.size

    @property
    def stacked(self):
        """Coefficients in (uplus, uminus) order, the ordering of wave Gramians."""
        return np.concatenate([self.uplus, self.uminus])

    @classmethod
    def from_stacked(cls, x, lambdas):
        x = np.asarray(x)
        n = x.size // 2
        return cls(x[:n], x[n:], lambdas)

    def conj(self):
        """Coefficients of the complex-conjugate solution (directions swap)."""
        return WaveState(self.uminus.conj(), self.uplus.conj(), self.lambdas)

    def __add__(self, other):
        return WaveState(self.uplus + other.uplus, self.uminus + other.uminus, self.lambdas)

    def __sub__(self, other):
        return WaveState(self.uplus - other.uplus, self.uminus - other.uminus, self.lambdas)

    def scaled(self, c):
        return WaveState(c * self.uplus, c * self.uminus, self.lambdas)


@dataclass(frozen=True, eq=False)
class SchrodingerState:
    """Coefficients of the initial datum of a Schrodinger solution."""

    u0: np.ndarray
    lambdas: np.ndarray

    def __post_init__(self):
        u = _frozen(self.u0)
        lam = np.array(self.lambdas, dtype=float, copy=True).reshape(-1)
        lam.setflags(write=False)
        if u.shape != lam.shape:
            raise ValueError(f"length mismatch: u0 {u.shape}, lambdas {lam.shape}")
        object.__setattr__(self, "u0", u)
        object.__setattr__(self, "lambdas", lam)

    @property
    def n_modes(self):
        return self.lambdas.size

    @property
    def stacked(self):
        return np.asarray(self.u0)

    @classmethod
    def from_stacked(cls, x, lambdas):
        return cls(x, lambdas)

    def __add__(self, other):
        return SchrodingerState(self.u0 + other.u0, self.lambdas)

    def __sub__(self, other):
        return SchrodingerState(self.u0 - other.u0, self.lambdas)

    def scaled(self, c):
        return SchrodingerState(c * self.u0, self.lambdas)


def _lambdas(model_or_lambdas):
    return np.asarray(getattr(model_or_lambdas, "lambdas", model_or_lambdas), dtype=float)


def wave_from_initial(u0, u1, model):
    """Half-wave coefficients from initial position and velocity coefficients."""
    lam = _lambdas(model)
    u0 = np.asarray(u0, dtype=complex)
    u1 = np.asarray(u1, dtype=complex)
    if not (u0.shape == u1.shape == lam.shape):
        raise ValueError(f"length mismatch: u0 {u0.shape}, u1 {u1.shape}, model {lam.shape}")
    w = 1j * u1 / np.sqrt(lam)
    return WaveState((u0 - w) / 2, (u0 + w) / 2, lam)


def wave_initial_from_halfwave(state):
    """Inverse of :func:`wave_from_initial`: returns ``(u0, u1)``."""
    om = np.sqrt(state.lambdas)
    return state.uplus + state.uminus, 1j * om * (state.uplus - state.uminus)


def evaluate_wave(state, t):
    """Coefficients of ``u(t)`` and ``d/dt u(t)``."""
    om = np.sqrt(state.lambdas)
    p = np.exp(1j * om * t) * state.uplus
    m = np.exp(-1j * om * t) * state.uminus
    return p + m, 1j * om * (p - m)


def wave_trace(state, times):
    """Coefficient trace, shape (len(times), n)."""
    t = np.asarray(times, dtype=float)[:, None]
    om = np.sqrt(state.lambdas)[None, :]
    return np.exp(1j * om * t) * state.uplus + np.exp(-1j * om * t) * state.uminus


def energy(state, s):
    """``E_s(u) = sum lam^s (|uplus|^2 + |uminus|^2)``."""
    return float(np.sum(state.lambdas ** s * (np.abs(state.uplus) ** 2 + np.abs(state.uminus) ** 2)))


def schrodinger_norm_sq(state, p):
    return float(np.sum(state.lambdas ** (2 * p) * np.abs(state.u0) ** 2))


def schrodinger_norm(state, p):
    """Norm in ``D(A^p)``: ``sqrt(sum lam^{2p} |u0|^2)``."""
    return np.sqrt(schrodinger_norm_sq(state, p))


def evaluate_schrodinger(state, t):
    return np.exp(1j * state.lambdas * t) * state.u0


def schrodinger_trace(state, times):
    t = np.asarray(times, dtype=float)[:, None]
    return np.exp(1j * state.lambdas[None, :] * t) * state.u0


def _weights(lam, level):
    return lam ** (-level / 2) if level else np.ones_like(lam)


def random_wave_state(model, seed, level=0.0):
    """Seeded random wave state.

    uplus then uminus are drawn from :class:`~obslab.rng.Xorshift64Star`,
    each coefficient with real and imaginary parts uniform on [-1, 1). With
    ``level = s`` every coefficient is scaled by ``lam^{-s/2}``, which spreads
    the s-energy evenly over the modes.
    """
    lam = _lambdas(model)
    g = Xorshift64Star(seed)
    w = _weights(lam, level)
    up = g.complex_symmetric(lam.size) * w
    um = g.complex_symmetric(lam.size) * w
    return WaveState(up, um, lam)


def random_schrodinger_state(model, seed, level=0.0):
    """Seeded random Schrodinger state; ``level = p`` scales by ``lam^{-p}``."""
    lam = _lambdas(model)
    g = Xorshift64Star(seed)
    return SchrodingerState(g.complex_symmetric(lam.size) * _weights(lam, 2 * level), lam)


def _pairs(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v)]


def _unpairs(p):
    p = np.asarray(p, dtype=float).reshape(-1, 2)
    return p[:, 0] + 1j * p[:, 1]


def state_to_json(state):
    if isinstance(state, WaveState):
        d = {"uplus": _pairs(state.uplus), "uminus": _pairs(state.uminus)}
    else:
        d = {"u0": _pairs(state.u0)}
    d["lambdas"] = [float(x) for x in state.lambdas]
    return json.dumps(d)


def state_from_json(text):
    d = json.loads(text)
    if "u0" in d:
        return SchrodingerState(_unpairs(d["u0"]), d["lambdas"])
    return WaveState(_unpairs(d["uplus"]), _unpairs(d["uminus"]), d["lambdas"])
