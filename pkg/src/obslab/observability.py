"""Observability Gramians and the constants derived from them.

Wave Gramians act on stacked half-wave coefficients ``x = (uplus, uminus)``
and Schrodinger Gramians on ``u0``; in both cases

    x^H G x = int_0^T |Obs u(t)|^2 dt.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import linalg

from .dyadic import band_indices, project_band, low_block, overlap_bound
from .errors import ConfigurationError
from .rng import Xorshift64Star
from .spectral_model import obs_factor
from .states import (WaveState, energy, schrodinger_norm_sq,
                     random_wave_state, random_schrodinger_state)

__all__ = [
    "time_phase_integral",
    "Gramian",
    "ConstantReport",
    "wave_gramian",
    "schrodinger_gramian",
    "gramian",
    "energy_weights",
    "wave_subspace",
    "band_subspace",
    "obs_constant",
    "band_constant",
    "admissibility_constant",
    "invisible_defect",
    "L1Estimate",
    "l1_constant_estimate",
    "TheoremReport",
    "theorem_experiment",
]

# eigenvalues below this fraction of the largest one are reported as exact zeros
ZERO_RTOL = 1e-13


def time_phase_integral(omega, T):
    """``int_0^T exp(i omega t) dt``, vectorised over omega.

    Uses ``(exp(i omega T) - 1) / (i omega)`` written with half-angle sines,
    and the cubic series when ``|omega| T <= 1e-8``.
    """
    w = np.asarray(omega, dtype=float)
    x = w * T
    small = np.abs(x) <= 1e-8
    ws = np.where(small, 1.0, w)
    xs = np.where(small, 1.0, x)
    # (exp(ix) - 1) / i = sin(x) + 2i sin^2(x/2)
    big = (np.sin(xs) + 2j * np.sin(xs / 2) ** 2) / ws
    series = T + 0.5j * w * T ** 2 - w ** 2 * T ** 3 / 6
    out = np.where(small, series, big)
    return out if np.ndim(omega) else complex(out)


@dataclass(frozen=True, eq=False)
class Gramian:
    matrix: np.ndarray
    horizon: float
    kind: str

    @property
    def n_modes(self):
        return self.matrix.shape[0] // (2 if self.kind == "wave" else 1)

    def quadratic(self, x):
        x = np.asarray(x)
        return float(np.real(np.vdot(x, self.matrix @ x)))


@dataclass
class ConstantReport:
    """Best constant of one observability (or admissibility) inequality.

    ``c`` is the smallest Rayleigh quotient, ``C_obs = 1/c`` (inf when c = 0).
    ``minimizer`` is a full-length coefficient vector with unit energy.
    Empty bands have ``dim = 0``, ``c = inf`` and ``C_obs = 0``.
    """

    c: float
    C_obs: float
    weights_exponent: float
    band: object = None
    minimizer: np.ndarray = None
    kind: str = "wave"
    horizon: float = float("nan")
    dim: int = 0

    @property
    def empty(self):
        return self.dim == 0

    def row(self):
        k = "global" if self.band is None else self.band
        return (self.kind, k, self.horizon, self.weights_exponent, self.c, self.C_obs, self.dim)


def wave_gramian(model, T):
    """2n x 2n Gramian on (uplus, uminus)."""
    om = np.sqrt(model.lambdas)
    f = np.concatenate([om, -om])
    M = np.asarray(model.obs_pairing)
    M2 = np.block([[M, M], [M, M]])
    G = time_phase_integral(f[None, :] - f[:, None], T) * M2
    return Gramian((G + G.conj().T) / 2, float(T), "wave")


def schrodinger_gramian(model, T):
    """n x n Gramian on u0."""
    lam = model.lambdas
    G = time_phase_integral(lam[None, :] - lam[:, None], T) * np.asarray(model.obs_pairing)
    return Gramian((G + G.conj().T) / 2, float(T), "schrodinger")


def gramian(model, T, kind):
    if kind == "wave":
        return wave_gramian(model, T)
    if kind == "schrodinger":
        return schrodinger_gramian(model, T)
    raise ValueError(f"kind must be 'wave' or 'schrodinger', got {kind!r}")


def energy_weights(model, exponent, kind):
    """Diagonal of the energy form in Gramian coordinates."""
    lam = model.lambdas
    if kind == "wave":
        return np.tile(lam ** exponent, 2)
    return lam ** (2 * exponent)


def wave_subspace(n, modes, block):
    """Gramian coordinates of ``modes`` (0-based) in block '+' or '-'."""
    modes = np.asarray(modes, dtype=int)
    if block == "+":
        return modes
    if block == "-":
        return modes + n
    raise ValueError(f"block must be '+' or '-', got {block!r}")


def band_subspace(model, scheme, k, kind):
    J = band_indices(scheme, model, k, kind)
    if kind == "wave":
        return wave_subspace(model.n_modes, J, "+" if k > 0 else "-")
    return J


def _normalized(G, model, exponent, subspace):
    w = energy_weights(model, exponent, G.kind)
    idx = np.arange(w.size) if subspace is None else np.asarray(subspace, dtype=int)
    d = 1.0 / np.sqrt(w[idx])
    A = d[:, None] * G.matrix[np.ix_(idx, idx)] * d[None, :]
    return (A + A.conj().T) / 2, d, idx, w.size


def obs_constant(G, model, exponent, subspace=None, band=None):
    """Smallest eigenvalue of ``W^-1/2 G W^-1/2`` on a coordinate subspace.

    Parameters
    ----------
    G : Gramian
    model : SpectralModel
    exponent : float
        Energy level (wave) or ``D(A^p)`` exponent (Schrodinger).
    subspace : array of int, optional
        Gramian coordinates; see :func:`wave_subspace`.

    Notes
    -----
    Eigenvalues within ``ZERO_RTOL`` of zero relative to the largest one are
    returned as exact zeros, with ``C_obs = inf``.
    """
    if subspace is not None and len(subspace) == 0:
        raise ValueError("zero-dimensional subspace")
    A, d, idx, size = _normalized(G, model, exponent, subspace)
    vals, vecs = linalg.eigh(A)
    c = float(vals[0])
    if c <= ZERO_RTOL * max(float(vals[-1]), 0.0):
        c = 0.0
    x = np.zeros(size, dtype=complex)
    x[idx] = d * vecs[:, 0]
    return ConstantReport(c=c, C_obs=1.0 / c if c > 0 else math.inf, weights_exponent=exponent,
                          band=band, minimizer=x, kind=G.kind, horizon=G.horizon, dim=idx.size)


def band_constant(model, scheme, k, T, exponent, kind, G=None):
    """Observability constant restricted to band k (one block for waves)."""
    if G is None:
        G = gramian(model, T, kind)
    sub = band_subspace(model, scheme, k, kind)
    if sub.size == 0:
        return ConstantReport(c=math.inf, C_obs=0.0, weights_exponent=exponent, band=k,
                              minimizer=None, kind=kind, horizon=float(T), dim=0)
    return obs_constant(G, model, exponent, sub, band=k)


def admissibility_constant(G, model, exponent, subspace=None):
    """Largest eigenvalue of ``W^-1/2 G W^-1/2``."""
    A, _, _, _ = _normalized(G, model, exponent, subspace)
    return float(linalg.eigvalsh(A)[-1])


def invisible_defect(model, T, kind):
    """Smallest eigenvalue of the exponent-0 Gramian; zero exactly when some solution is invisible."""
    return obs_constant(gramian(model, T, kind), model, 0.0).c


@dataclass
class L1Estimate:
    """Result of the L1-in-time constant search.

    ``value`` is the best (smallest) ``int_0^T |Obs u| dt`` found on the unit
    sphere, an upper estimate of the true constant. ``envelope`` is
    ``sqrt(T c_L2)``, which ``value`` never exceeds.
    """

    value: float
    envelope: float
    minimizer: np.ndarray
    starts: int
    iterations: int


def _trap_weights(n, T):
    q = np.full(n, T / (n - 1))
    q[[0, -1]] /= 2
    return q


def l1_constant_estimate(model, T, exponent, kind="schrodinger", n_time=1025, starts=8,
                         seed=0, max_iter=300, tol=1e-10):
    """Multi-start projected gradient search for ``min int_0^T |Obs u(t)| dt``.

    Runs on the unit energy sphere, with one start at the L2 minimiser and the
    rest drawn from the seeded generator. Time integrals use the trapezoid
    rule on ``n_time`` points.
    """
    G = gramian(model, T, kind)
    l2 = obs_constant(G, model, exponent)
    w = energy_weights(model, exponent, kind)
    D = 1.0 / np.sqrt(w)
    R = obs_factor(model)
    t = np.linspace(0.0, T, int(n_time))
    q = _trap_weights(t.size, T)
    if kind == "wave":
        om = np.sqrt(model.lambdas)
        E = np.exp(1j * np.outer(t, np.concatenate([om, -om])))
        n = model.n_modes

        def coeffs(x):
            X = E * x[None, :]
            return X[:, :n] + X[:, n:]

        def back(Z):
            return np.concatenate([Z, Z], axis=1)
    else:
        E = np.exp(1j * np.outer(t, model.lambdas))

        def coeffs(x):
            return E * x[None, :]

        def back(Z):
            return Z

    def f_and_grad(z):
        Y = coeffs(D * z) @ R.T
        nrm = np.sqrt(np.sum(np.abs(Y) ** 2, axis=1))
        val = float(q @ nrm)
        Z = (Y / np.maximum(nrm, 1e-300)[:, None]) @ R.conj()
        g = D * np.sum(q[:, None] * np.conj(E) * back(Z), axis=0)
        return val, g

    z0 = l2.minimizer / D
    rng = Xorshift64Star(seed)
    inits = [z0] + [rng.complex_symmetric(z0.size) for _ in range(max(starts - 1, 0))]
    best, best_z, total = math.inf, None, 0
    for z in inits:
        z = z / np.linalg.norm(z)
        val, g = f_and_grad(z)
        step = 1.0
        for _ in range(max_iter):
            total += 1
            gt = g - np.real(np.vdot(z, g)) * z
            gn = np.linalg.norm(gt)
            if gn < tol:
                break
            while step > 1e-14:
                zn = z - step * gt
                zn /= np.linalg.norm(zn)
                vn, gnew = f_and_grad(zn)
                if vn <= val - 1e-4 * step * gn * gn:
                    break
                step /= 2
            else:
                break
            if val - vn < tol * max(val, 1.0):
                z, val, g = zn, vn, gnew
                break
            z, val, g = zn, vn, gnew
            step *= 2
        if val < best:
            best, best_z = val, D * z
    return L1Estimate(value=best, envelope=math.sqrt(T * l2.c), minimizer=best_z,
                      starts=len(inits), iterations=total)


@dataclass
class TheoremReport:
    """Band, low-mode and global constants, plus the numerically assembled chain.

    ``chain`` rows are ``(seed, energy, low_term, band_rhs, assembled_rhs,
    slack_band, slack_assembled)``; a slack is the right side over the energy,
    so the inequality closes when it is at least 1.
    """

    kind: str
    T: float
    T_prime: float
    exponent: float
    k0: int
    k_max: int
    overlap: int
    bands: list
    low: ConstantReport
    global_: ConstantReport
    defect: float
    flags: list = field(default_factory=list)
    chain: list = field(default_factory=list)

    @property
    def band_values(self):
        return [b.c for b in self.bands if not b.empty]

    @property
    def min_band_c(self):
        v = self.band_values
        return min(v) if v else math.inf

    @property
    def max_band_C(self):
        v = [b.C_obs for b in self.bands if not b.empty]
        return max(v) if v else 0.0

    @property
    def min_slack_band(self):
        return min((r[5] for r in self.chain), default=math.nan)

    @property
    def min_slack_assembled(self):
        return min((r[6] for r in self.chain), default=math.nan)

    def closes(self, rtol=1e-10):
        return bool(self.chain) and min(self.min_slack_band, self.min_slack_assembled) >= 1 - rtol


def _size(state, exponent):
    if isinstance(state, WaveState):
        return energy(state, exponent)
    return schrodinger_norm_sq(state, exponent)


def theorem_experiment(model, scheme, T, T_prime, exponent, kind, k0=1, order_cap=None,
                       seeds=range(10)):
    """Constants behind the band-to-global observability argument at finite truncation.

    Computes band constants for ``k0 <= |k| <= k_max`` at horizon ``T``, the
    constant on the low modes (``lam <= 1`` plus bands ``|k| < k0``) and the
    global constant at ``T_prime``, and instantiates the energy chain on
    seeded random states.

    Parameters
    ----------
    exponent : float
        l1 for waves, p1 for Schrodinger.
    order_cap : float, optional
        2 m0 for waves, m0 for Schrodinger; defaults to the model's m0 rule.
        Exceeding it is flagged.

    Raises
    ------
    ConfigurationError
        If ``T_prime <= T`` or the band plateaus do not reach the top of the spectrum.
    """
    problems = []
    if not (0 < T < T_prime):
        problems.append(f"need 0 < T < T_prime, got T={T}, T_prime={T_prime}")
    top = math.sqrt(model.lambdas[-1]) if kind == "wave" else model.lambdas[-1]
    if scheme.plateau_reach() < top:
        problems.append(f"scheme/spectrum mismatch: band plateaus reach {scheme.plateau_reach():.6g} "
                        f"but the spectrum extends to {top:.6g}")
    if not (1 <= k0 <= scheme.k_max):
        problems.append(f"need 1 <= k0 <= k_max, got k0={k0}")
    if problems:
        raise ConfigurationError(problems)
    if order_cap is None:
        order_cap = 2 * model.obs_regularity if kind == "wave" else model.obs_regularity

    flags = list(scheme.hypothesis_violations())
    if exponent > order_cap:
        flags.append(f"exponent {exponent} exceeds its cap {order_cap}")
    diag = np.real(np.diag(model.obs_pairing))
    if np.any(diag <= 0):
        flags.append(f"unique continuation surrogate fails on modes {list(np.flatnonzero(diag <= 0) + 1)}")

    GT = gramian(model, T, kind)
    GTp = gramian(model, T_prime, kind)
    kmax = scheme.k_max
    if kind == "wave":
        hi = [k for k in range(k0, kmax + 1)] + [-k for k in range(k0, kmax + 1)]
        lo = [k for k in range(1, k0)] + [-k for k in range(1, k0)]
    else:
        hi = list(range(k0, kmax + 1))
        lo = list(range(1, k0))
    bands = [band_constant(model, scheme, k, T, exponent, kind, G=GT) for k in hi]
    if any(b.c <= 0 for b in bands if not b.empty):
        flags.append("some band constant vanishes")

    n = model.n_modes
    low_modes = np.flatnonzero(model.lambdas <= 1.0)
    if kind == "wave":
        sub = set(low_modes) | set(low_modes + n)
    else:
        sub = set(low_modes)
    for k in lo:
        sub |= set(band_subspace(model, scheme, k, kind).tolist())
    sub = np.array(sorted(sub), dtype=int)
    if sub.size:
        low = obs_constant(GTp, model, exponent, sub, band="low")
    else:
        low = ConstantReport(math.inf, 0.0, exponent, band="low", kind=kind, horizon=float(T_prime), dim=0)
    glob = obs_constant(GTp, model, exponent)
    defect = obs_constant(GTp, model, 0.0).c
    if defect == 0:
        flags.append("invisible solution: Gramian is singular")
    if glob.c == 0:
        flags.append("global constant vanishes")

    m = overlap_bound(scheme)
    Cmax = max((b.C_obs for b in bands if not b.empty), default=0.0)
    chain = []
    for s in seeds:
        if kind == "wave":
            u = random_wave_state(model, s, level=exponent)
        else:
            u = random_schrodinger_state(model, s, level=exponent)
        E = _size(u, exponent)
        low_term = _size(low_block(u), exponent) + sum(_size(project_band(scheme, u, k), exponent) for k in lo)
        band_rhs = low_term
        for b in bands:
            if not b.empty:
                band_rhs += b.C_obs * GT.quadratic(project_band(scheme, u, b.band).stacked)
        assembled = low_term + m * Cmax * GTp.quadratic(u.stacked)
        chain.append((int(s), E, low_term, band_rhs, assembled, band_rhs / E, assembled / E))
    return TheoremReport(kind=kind, T=float(T), T_prime=float(T_prime), exponent=exponent, k0=k0,
                         k_max=kmax, overlap=m, bands=bands, low=low, global_=glob, defect=defect,
                         flags=flags, chain=chain)
