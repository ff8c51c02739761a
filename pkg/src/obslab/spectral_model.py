"""Truncated eigensystems of the abstract operator together with the observation pairing.

A model stores the ascending eigenvalues ``lambdas`` and the Hermitian matrix
``M[nu, mu] = <Obs e_nu, Obs e_mu>``; the observation space itself is never built.
Indices are 0-based in arrays and 1-based (``nu = 1..n``) in the public helpers
that take mode numbers.
"""

from dataclasses import dataclass, field
import json

import numpy as np
from scipy import linalg

from .errors import ConfigurationError

__all__ = [
    "ObservationSpec",
    "SpectralModel",
    "build_dirichlet_interval",
    "build_dense",
    "obs_inner",
    "obs_factor",
    "model_to_json",
    "model_from_json",
]

_KINDS = ("interior", "neumann", "identity", "matrix")


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ObservationSpec:
    """What is observed, and the regularity exponent m0 of the observation.

    Use the classmethods rather than the raw constructor.
    """

    kind: str
    a: float = None
    b: float = None
    endpoint: str = None
    matrix: np.ndarray = None
    m0: float = 0.0

    @classmethod
    def interior(cls, a, b, m0=0.0):
        return cls("interior", a=float(a), b=float(b), m0=float(m0))

    @classmethod
    def neumann(cls, endpoint="left", m0=0.8):
        # hidden regularity needs m0 > 3/4 for the boundary trace
        return cls("neumann", endpoint=endpoint, m0=float(m0))

    @classmethod
    def identity(cls, m0=0.0):
        return cls("identity", m0=float(m0))

    @classmethod
    def from_matrix(cls, B, m0=0.0):
        return cls("matrix", matrix=_readonly(np.atleast_2d(B)), m0=float(m0))

    def describe(self):
        d = {"kind": self.kind, "m0": self.m0}
        if self.kind == "interior":
            d.update(a=self.a, b=self.b)
        elif self.kind == "neumann":
            d.update(endpoint=self.endpoint)
        elif self.kind == "matrix":
            d.update(shape=list(self.matrix.shape))
        return d


@dataclass(frozen=True)
class SpectralModel:
    """Finite spectral truncation: eigenvalues plus observation pairing.

    Attributes
    ----------
    n_modes : int
    lambdas : ndarray, shape (n,)
        Positive and nondecreasing.
    obs_pairing : ndarray, shape (n, n)
        Hermitian positive semidefinite, ``M[nu, mu] = <Obs e_nu, Obs e_mu>``.
    obs_regularity : float
        The exponent m0 in ``|Obs u| <= C0 |u|_{D(A^m0)}``.
    provenance : dict
    """

    n_modes: int
    lambdas: np.ndarray
    obs_pairing: np.ndarray
    obs_regularity: float = 0.0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        M = np.asarray(self.obs_pairing)
        if not np.iscomplexobj(M):
            M = M.astype(float)
        problems = []
        if self.n_modes < 1:
            problems.append("n_modes must be >= 1")
        if lam.shape != (self.n_modes,):
            problems.append(f"lambdas has shape {lam.shape}, expected ({self.n_modes},)")
        if M.shape != (self.n_modes, self.n_modes):
            problems.append(f"obs_pairing has shape {M.shape}, expected square of size {self.n_modes}")
        if problems:
            raise ConfigurationError(problems)
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            problems.append("eigenvalues must be finite and > 0")
        if np.any(np.diff(lam) < 0):
            problems.append("eigenvalues must be nondecreasing")
        scale = max(np.abs(M).max(), 1.0)
        if np.abs(M - M.conj().T).max() > 1e-12 * scale:
            problems.append("obs_pairing is not Hermitian")
        if M.size and np.linalg.eigvalsh((M + M.conj().T) / 2).min() < -1e-10 * scale:
            problems.append("obs_pairing is not positive semidefinite")
        if problems:
            raise ConfigurationError(problems)
        object.__setattr__(self, "lambdas", _readonly(lam))
        object.__setattr__(self, "obs_pairing", _readonly(M))
        object.__setattr__(self, "obs_regularity", float(self.obs_regularity))

    @property
    def sqrt_lambdas(self):
        return np.sqrt(self.lambdas)

    def with_pairing(self, M, **provenance):
        """Copy of the model with a different pairing (used for constructed counterexamples)."""
        prov = dict(self.provenance)
        prov.update(provenance)
        return SpectralModel(self.n_modes, self.lambdas, M, self.obs_regularity, prov)


def _interior_pairing(L, n, a, b):
    nu = np.arange(1, n + 1, dtype=float)
    k = nu * np.pi / L
    # off-diagonal: (1/L) [sin(d x)/d - sin(s x)/s]_a^b with d, s = (nu -/+ mu) pi / L
    d = k[:, None] - k[None, :]
    s = k[:, None] + k[None, :]
    off = np.eye(n, dtype=bool)
    d_safe = np.where(off, 1.0, d)
    M = ((np.sin(d_safe * b) - np.sin(d_safe * a)) / d_safe
         - (np.sin(s * b) - np.sin(s * a)) / s) / L
    diag = ((b - a) - (np.sin(2 * k * b) - np.sin(2 * k * a)) / (2 * k)) / L
    M[off] = diag
    return (M + M.T) / 2


def build_dirichlet_interval(length, n_modes, obs):
    """Dirichlet Laplacian on (0, L): ``lambda_nu = (nu pi / L)^2``.

    Parameters
    ----------
    length : float
    n_modes : int
    obs : ObservationSpec

    Returns
    -------
    SpectralModel
    """
    L = float(length)
    n = int(n_modes)
    problems = []
    if not L > 0:
        problems.append(f"length must be > 0, got {length}")
    if n < 1:
        problems.append(f"n_modes must be >= 1, got {n_modes}")
    if obs.kind not in _KINDS:
        problems.append(f"unknown observation kind {obs.kind!r}")
    if obs.kind == "interior" and not (0 <= obs.a < obs.b <= L):
        problems.append(f"interior window must satisfy 0 <= a < b <= L, got a={obs.a}, b={obs.b}, L={L}")
    if obs.kind == "neumann" and obs.endpoint not in ("left", "right"):
        problems.append(f"neumann endpoint must be 'left' or 'right', got {obs.endpoint!r}")
    if obs.kind == "matrix" and (obs.matrix.ndim != 2 or obs.matrix.shape[1] != n):
        problems.append(f"observation matrix must have {n} columns")
    if problems:
        raise ConfigurationError(problems)

    nu = np.arange(1, n + 1, dtype=float)
    lambdas = (nu * np.pi / L) ** 2
    if obs.kind == "interior":
        M = _interior_pairing(L, n, obs.a, obs.b)
    elif obs.kind == "neumann":
        # e_nu'(0) = sqrt(2/L) nu pi / L, and e_nu'(L) picks up (-1)^nu
        g = np.sqrt(2.0 / L) * nu * np.pi / L
        if obs.endpoint == "right":
            g = g * (-1.0) ** nu
        M = np.outer(g, g)
    elif obs.kind == "identity":
        M = np.eye(n)
    else:
        B = np.asarray(obs.matrix)
        M = B.conj().T @ B
        M = (M + M.conj().T) / 2
    prov = {"kind": "dirichlet_interval", "length": L, "observation": obs.describe()}
    return SpectralModel(n, lambdas, M, obs.m0, prov)


def build_dense(matrix, obs_matrix, m0=0.0):
    """Model from a symmetric positive definite matrix and an observation matrix.

    The pairing is ``(B V)^T (B V)`` with ``V`` the eigenvectors of ``matrix``.
    Eigenvector signs are fixed so that the largest-magnitude entry of each
    column is positive.
    """
    A = np.asarray(matrix, dtype=float)
    B = np.atleast_2d(np.asarray(obs_matrix, dtype=float))
    problems = []
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigurationError(f"matrix must be square, got shape {A.shape}")
    n = A.shape[0]
    if B.shape[1] != n:
        problems.append(f"obs_matrix must have {n} columns, got shape {B.shape}")
    if np.abs(A - A.T).max() > 1e-10 * max(1.0, np.abs(A).max()):
        problems.append("matrix is not symmetric within 1e-10")
    if problems:
        raise ConfigurationError(problems)
    lam, V = linalg.eigh((A + A.T) / 2)
    if lam[0] <= 0:
        raise ConfigurationError(f"matrix is not positive definite (smallest eigenvalue {lam[0]:.3e})")
    idx = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[idx, np.arange(n)])
    BV = B @ V
    M = BV.T @ BV
    prov = {"kind": "dense", "n": n, "q": B.shape[0]}
    return SpectralModel(n, lam, (M + M.T) / 2, m0, prov)


def obs_inner(model, nu, mu):
    """Pairing ``<Obs e_nu, Obs e_mu>`` for 1-based mode numbers."""
    n = model.n_modes
    for i in (nu, mu):
        if not (1 <= i <= n):
            raise IndexError(f"mode index {i} outside 1..{n}")
    return model.obs_pairing[nu - 1, mu - 1]


def obs_factor(model, rtol=1e-14):
    """A matrix ``R`` with ``R^H R = M``, so that ``|R c|`` is the observation seminorm.

    Built from the eigendecomposition of the pairing; directions with
    eigenvalue below ``rtol * max`` are dropped.
    """
    w, U = np.linalg.eigh(model.obs_pairing)
    keep = w > rtol * max(w.max(), 0.0)
    if not np.any(keep):
        return np.zeros((1, model.n_modes))
    return np.sqrt(w[keep])[:, None] * U[:, keep].conj().T


def _pairs(M):
    M = np.asarray(M)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def model_to_json(model):
    return json.dumps({
        "n_modes": model.n_modes,
        "lambdas": [float(x) for x in model.lambdas],
        "obs_pairing": _pairs(model.obs_pairing),
        "m0": model.obs_regularity,
        "provenance": model.provenance,
    }, indent=1)


def model_from_json(text):
    d = json.loads(text)
    P = np.array(d["obs_pairing"], dtype=float)
    M = P[..., 0] + 1j * P[..., 1]
    if not np.any(M.imag):
        M = M.real
    return SpectralModel(int(d["n_modes"]), d["lambdas"], M, d.get("m0", 0.0), d.get("provenance", {}))
