"""Dyadic frequency scheme: bumps F and F_tilde, bands J_k, band projections.

Conventions
-----------
``h_k = rho^-|k|``. The filter of band k evaluated at a (signed) frequency
``tau`` is ``F(sgn(k) h_k tau)`` with ``F`` vanishing on the negative axis, so
k > 0 keeps positive frequencies and k < 0 negative ones.

``F`` is supported in ``(alpha, 1/alpha)`` and equal to 1 on ``[a, 1/a]``.
``F_tilde`` is supported in ``(alpha_tilde, 1/alpha_tilde)`` and equal to 1 on
``[a_tilde, 1/a_tilde]`` with ``a_tilde < alpha``, so it is identically 1 on a
neighbourhood of ``supp F``.
"""

from dataclasses import dataclass, asdict
import json
import math

import numpy as np

from .errors import ConfigurationError
from .states import WaveState, SchrodingerState

__all__ = [
    "smooth_step",
    "DyadicScheme",
    "bump_eval",
    "band_filter",
    "band_indices",
    "project_band",
    "low_block",
    "covering_sums",
    "covering_defect",
    "overlap_count",
    "overlap_counts",
    "overlap_bound",
    "band_report",
]


def _g(x):
    out = np.zeros_like(x)
    m = x > 0
    out[m] = np.exp(-1.0 / x[m])
    return out


def smooth_step(x, lo, hi):
    """C-infinity step: 0 for ``x <= lo``, 1 for ``x >= hi``.

    Uses ``g(y) / (g(y) + g(1 - y))`` with ``g(y) = exp(-1/y)`` and
    ``y = (x - lo) / (hi - lo)``, i.e. the transition is normalised to the
    width of the interval.
    """
    y = (np.asarray(x, dtype=float) - lo) / (hi - lo)
    y = np.atleast_1d(y)
    p, q = _g(y), _g(1.0 - y)
    out = p / (p + q)
    return out if np.ndim(x) else float(out[0])


def _bump(sigma, edge, plateau):
    # zero for sigma <= edge and sigma >= 1/edge, one on [plateau, 1/plateau]
    s = np.atleast_1d(np.asarray(sigma, dtype=float))
    out = np.zeros_like(s)
    m = s > 0
    sm = s[m]
    out[m] = smooth_step(sm, edge, plateau) * smooth_step(-sm, -1.0 / edge, -1.0 / plateau)
    return out


@dataclass(frozen=True)
class DyadicScheme:
    """Parameters of the dyadic decomposition.

    Parameters
    ----------
    alpha : float
        Support edge of F, in (0, 1).
    a : float
        Plateau edge of F, in (alpha, 1).
    rho : float
        Ratio between consecutive scales, > 1.
    k_max : int
        Largest |k| used.
    a_tilde, alpha_tilde : float
        Plateau and support edges of F_tilde, ``0 < alpha_tilde < a_tilde < alpha``.

    Notes
    -----
    The covering property of the filters needs ``a < 1/rho`` (hence
    ``rho alpha < 1``). Schemes violating it can still be built, so that band
    sets and overlaps can be inspected, but :meth:`hypothesis_violations`
    reports them and covering is not expected to hold.
    """

    alpha: float = 0.4
    a: float = 0.6
    rho: float = 1.5
    k_max: int = 30
    a_tilde: float = 0.35
    alpha_tilde: float = 0.3

    def __post_init__(self):
        problems = []
        al, a, rho = self.alpha, self.a, self.rho
        if not (0 < al < 1):
            problems.append(f"alpha must lie in (0, 1), got {al}")
        if not (al < a < 1):
            problems.append(f"a must lie in (alpha, 1), got {a}")
        if not rho > 1:
            problems.append(f"rho must be > 1, got {rho}")
        if not (0 < self.alpha_tilde < self.a_tilde < al):
            problems.append("outer bump needs 0 < alpha_tilde < a_tilde < alpha, got "
                            f"alpha_tilde={self.alpha_tilde}, a_tilde={self.a_tilde}, alpha={al}")
        if int(self.k_max) != self.k_max or self.k_max < 1:
            problems.append(f"k_max must be a positive integer, got {self.k_max}")
        if problems:
            raise ConfigurationError(problems)

    @classmethod
    def from_params(cls, alpha=0.4, rho=1.5, a=None, k_max=30, a_tilde=None, alpha_tilde=None):
        """Fill unspecified edges from alpha and rho.

        ``a`` defaults to three quarters of the way from alpha to 1/rho
        (0.6 for the default alpha = 0.4, rho = 1.5), the outer bump to
        ``a_tilde = 7 alpha / 8`` and ``alpha_tilde = 3 alpha / 4``.
        """
        if a is None:
            top = min(1.0 / rho, 1.0)
            a = alpha + 0.75 * (top - alpha) if top > alpha else (1.0 + alpha) / 2
        if a_tilde is None:
            a_tilde = 7 * alpha / 8
        if alpha_tilde is None:
            alpha_tilde = 3 * alpha / 4
        return cls(alpha=alpha, a=a, rho=rho, k_max=int(k_max), a_tilde=a_tilde, alpha_tilde=alpha_tilde)

    def h(self, k):
        return self.rho ** (-abs(k))

    def hypothesis_violations(self):
        out = []
        if not self.a < 1.0 / self.rho:
            out.append(f"a < 1/rho fails (a={self.a}, 1/rho={1.0 / self.rho:.6g})")
        if not self.rho * self.alpha < 1:
            out.append(f"rho*alpha < 1 fails (rho*alpha={self.rho * self.alpha:.6g})")
        return out

    def plateau_reach(self):
        """Largest |tau| covered by the plateaus of bands 1..k_max."""
        return self.rho ** self.k_max / self.a

    def to_json(self):
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _edges(scheme, which):
    if which == "F":
        return scheme.alpha, scheme.a
    if which == "F_tilde":
        return scheme.alpha_tilde, scheme.a_tilde
    raise ValueError(f"which must be 'F' or 'F_tilde', got {which!r}")


def bump_eval(scheme, sigma, which="F"):
    """Evaluate F (or F_tilde) at sigma; vectorised, returns floats in [0, 1]."""
    edge, plateau = _edges(scheme, which)
    out = _bump(sigma, edge, plateau)
    return out if np.ndim(sigma) else float(out[0])


def band_filter(scheme, k, tau, which="F"):
    """Multiplier symbol ``F_k(h_k tau) = F(sgn(k) h_k tau)``."""
    if k == 0:
        raise ValueError("k = 0 is not a band")
    return bump_eval(scheme, np.sign(k) * scheme.h(k) * np.asarray(tau, dtype=float), which)


def _band_variable(model_or_lambdas, kind):
    lam = np.asarray(getattr(model_or_lambdas, "lambdas", model_or_lambdas), dtype=float)
    if kind == "wave":
        return np.sqrt(lam)
    if kind == "schrodinger":
        return lam
    raise ValueError(f"kind must be 'wave' or 'schrodinger', got {kind!r}")


def band_indices(scheme, model, k, kind="wave", which="F"):
    """0-based indices of the modes in band k.

    Wave: ``alpha rho^|k| <= sqrt(lam) < rho^|k| / alpha``; Schrodinger uses lam.
    With ``which='F_tilde'`` the widened band of the outer bump is returned.
    """
    _check_k(k, kind)
    x = _band_variable(model, kind)
    edge, _ = _edges(scheme, which)
    K = scheme.rho ** abs(k)
    return np.flatnonzero((edge * K <= x) & (x < K / edge))


def _check_k(k, kind):
    if kind == "wave" and k == 0:
        raise ValueError("wave bands need k != 0")
    if kind == "schrodinger" and k < 1:
        raise ValueError("Schrodinger bands need k >= 1")


def project_band(scheme, state, k, which="F"):
    """Exact band projection ``u^k`` as a coefficient mask.

    Wave, k > 0: ``uplus * F(h_k sqrt(lam))``, uminus dropped; k < 0 the
    mirror image. Schrodinger: ``u0 * F(h_k lam)``.
    """
    if isinstance(state, WaveState):
        _check_k(k, "wave")
        f = bump_eval(scheme, scheme.h(k) * np.sqrt(state.lambdas), which)
        zero = np.zeros_like(state.uplus)
        if k > 0:
            return WaveState(state.uplus * f, zero, state.lambdas)
        return WaveState(zero, state.uminus * f, state.lambdas)
    if isinstance(state, SchrodingerState):
        _check_k(k, "schrodinger")
        f = bump_eval(scheme, scheme.h(k) * state.lambdas, which)
        return SchrodingerState(state.u0 * f, state.lambdas)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def low_block(state):
    """Component on the modes with ``lam <= 1``."""
    keep = state.lambdas <= 1.0
    if isinstance(state, WaveState):
        return WaveState(state.uplus * keep, state.uminus * keep, state.lambdas)
    return SchrodingerState(state.u0 * keep, state.lambdas)


def covering_sums(scheme, tau):
    """``sum_{0 < |k| <= k_max} F_k(h_k tau)^2`` for an array of tau."""
    t = np.abs(np.asarray(tau, dtype=float))
    ks = np.arange(1, scheme.k_max + 1)
    # only bands with the sign of tau contribute, and F is even under the flip
    sig = t[None, :] * scheme.rho ** (-ks[:, None].astype(float))
    f = _bump(sig.ravel(), scheme.alpha, scheme.a).reshape(sig.shape)
    return np.sum(f * f, axis=0)


def _log_grid(tau_lo, tau_hi, samples):
    t = np.geomspace(tau_lo, tau_hi, int(samples))
    return np.concatenate([t, -t])


def covering_defect(scheme, tau_lo, tau_hi, samples):
    """Minimum of the covering sum over a log grid of |tau| in [tau_lo, tau_hi], both signs.

    Raises
    ------
    ConfigurationError
        If ``tau_lo < 1`` or the plateaus of bands 1..k_max stop short of tau_hi.
    """
    problems = []
    if not (1 <= tau_lo < tau_hi):
        problems.append(f"need 1 <= tau_lo < tau_hi, got {tau_lo}, {tau_hi}")
    if scheme.plateau_reach() < tau_hi:
        problems.append(f"k_max={scheme.k_max} too small: plateaus reach {scheme.plateau_reach():.6g} < tau_hi={tau_hi}")
    if problems:
        raise ConfigurationError(problems)
    return float(covering_sums(scheme, _log_grid(tau_lo, tau_hi, samples)).min())


def overlap_bound(scheme):
    """``floor(2 ln(1/alpha) / ln rho) + 1``."""
    return int(math.floor(2 * math.log(1 / scheme.alpha) / math.log(scheme.rho))) + 1


def overlap_counts(scheme, tau):
    """Number of bands k in Z* (not truncated at k_max) with ``F_k(h_k tau) != 0``.

    Membership is decided by the open support test ``alpha < h_k |tau| < 1/alpha``.
    """
    t = np.abs(np.atleast_1d(np.asarray(tau, dtype=float)))
    tmax = t.max() if t.size else 0.0
    kcap = max(1, int(math.ceil(math.log(max(tmax, 1.0) / scheme.alpha) / math.log(scheme.rho))) + 2)
    ks = np.arange(1, kcap + 1, dtype=float)
    sig = t[None, :] * scheme.rho ** (-ks[:, None])
    return np.sum((sig > scheme.alpha) & (sig < 1 / scheme.alpha), axis=0)


def overlap_count(scheme, tau):
    return int(overlap_counts(scheme, [tau])[0])


def band_report(scheme, model, kind="wave"):
    """Rows ``(k, h_k, first nu, last nu, card J_k)`` with 1-based nu; empty bands give None."""
    ks = range(1, scheme.k_max + 1)
    if kind == "wave":
        ks = [-k for k in reversed(ks)] + list(ks)
    rows = []
    for k in ks:
        J = band_indices(scheme, model, k, kind)
        first, last = (int(J[0]) + 1, int(J[-1]) + 1) if J.size else (None, None)
        rows.append((k, scheme.h(k), first, last, int(J.size)))
    return rows
