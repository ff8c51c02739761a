"""Band filters acting in time as FFT multipliers, and the experiments built on them."""

from dataclasses import dataclass, field
import math

import numpy as np

from .dyadic import band_filter, project_band, smooth_step, _edges
from .errors import PreconditionError
from .spectral_model import obs_factor
from .states import WaveState, wave_trace, schrodinger_trace

__all__ = [
    "TimeSignal",
    "TimeWindowing",
    "sample_state",
    "check_resolution",
    "apply_multiplier",
    "commutation_check",
    "commutation_profile",
    "h_norm",
    "DecayTable",
    "decay_experiment",
    "tau_separation_ratios",
    "tau_separation_profile",
    "tau_separation_check",
]


@dataclass(frozen=True, eq=False)
class TimeSignal:
    """Uniformly sampled signal ``values[i] = w(t0 + i dt)``, shape (N, d)."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] < 2:
            raise PreconditionError("a signal needs at least 2 samples")
        if not self.dt > 0:
            raise PreconditionError(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "values", v)

    @property
    def n_samples(self):
        return self.values.shape[0]

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.n_samples)

    @property
    def span(self):
        return self.n_samples * self.dt

    def angular_frequencies(self):
        return 2 * np.pi * np.fft.fftfreq(self.n_samples, self.dt)

    def l2_norm(self):
        return math.sqrt(np.sum(np.abs(self.values) ** 2) * self.dt)

    def to_rows(self):
        """(t, re, im) rows for scalar signals; one (re, im) pair per component otherwise."""
        rows = []
        for t, v in zip(self.times, self.values):
            row = [float(t)]
            for z in v:
                row += [float(z.real), float(z.imag)]
            rows.append(row)
        return rows


@dataclass(frozen=True)
class TimeWindowing:
    """Cutoffs phi (inside the window) and psi (around it).

    ``phi`` is supported in ``T_window * phi_support`` and equals 1 on
    ``T_window * phi_plateau``. ``psi`` equals 1 on
    ``[-psi_plateau delta, T_window + psi_plateau delta]`` and vanishes
    outside ``(-delta, T_window + delta)``; ``delta = inf`` means psi = 1.
    """

    T_window: float = 2 * math.pi
    delta: float = math.pi / 4
    phi_support: tuple = (0.25, 0.75)
    phi_plateau: tuple = (0.375, 0.625)
    psi_plateau: float = 0.75

    def __post_init__(self):
        s0, s1 = self.phi_support
        p0, p1 = self.phi_plateau
        if not self.T_window > 0:
            raise ValueError(f"T_window must be > 0, got {self.T_window}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if not (0 < s0 < p0 < p1 < s1 < 1):
            raise ValueError("need 0 < phi_support[0] < phi_plateau[0] < phi_plateau[1] < phi_support[1] < 1")
        if not (0 < self.psi_plateau < 1):
            raise ValueError("psi_plateau must lie in (0, 1)")

    @classmethod
    def from_horizons(cls, T, T_prime, delta=None, **kw):
        """Window ``(T + T') / 2``; delta defaults to ``(T' - T) / 2``."""
        if delta is None:
            delta = (T_prime - T) / 2
        return cls(T_window=(T + T_prime) / 2, delta=delta, **kw)

    def phi(self, t):
        x = np.asarray(t, dtype=float) / self.T_window
        (s0, s1), (p0, p1) = self.phi_support, self.phi_plateau
        return smooth_step(x, s0, p0) * smooth_step(-x, -s1, -p1)

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        if math.isinf(self.delta):
            return np.ones_like(t)
        d, q, T = self.delta, self.psi_plateau, self.T_window
        return smooth_step(t, -d, -q * d) * smooth_step(-t, -(T + d), -(T + q * d))

    def describe(self):
        return {"T_window": self.T_window, "delta": self.delta, "phi_support": list(self.phi_support),
                "phi_plateau": list(self.phi_plateau), "psi_plateau": self.psi_plateau}


def check_resolution(dt, scheme, k, which="F"):
    """Raise unless the grid step resolves every frequency band k lets through."""
    edge, _ = _edges(scheme, which)
    if not dt < math.pi * edge * scheme.h(k):
        raise PreconditionError(
            f"dt={dt:.6g} aliases band k={k}: need dt < pi*{edge}*h_k = {math.pi * edge * scheme.h(k):.6g}")


def apply_multiplier(signal, scheme, k, which="F"):
    """Apply ``F_k(h_k D_t)`` on the periodic grid of the signal.

    The symbol is evaluated at the signed angular frequencies
    ``2 pi fftfreq(N, dt)``, so a tone ``exp(i r t)`` on the grid comes out
    multiplied by ``F(sgn(k) h_k r)``.
    """
    check_resolution(signal.dt, scheme, k, which)
    m = band_filter(scheme, k, signal.angular_frequencies(), which)
    out = np.fft.ifft(m[:, None] * np.fft.fft(signal.values, axis=0), axis=0)
    return TimeSignal(signal.t0, signal.dt, out)


def sample_state(state, times):
    """Coefficient trace of a wave or Schrodinger state, shape (len(times), n)."""
    if isinstance(state, WaveState):
        return wave_trace(state, times)
    return schrodinger_trace(state, times)


def commutation_check(model, state, scheme, k, t0, dt, n_samples, which="F"):
    """Largest pointwise gap between ``F_k(h_k D_t) Obs u`` and ``Obs u^k``.

    The observation is realised through a factor ``R`` of the pairing, so the
    norm of the gap is the observation seminorm. Exact (to rounding) when the
    grid span is a common period of the state's frequencies.
    """
    return commutation_profile(model, state, scheme, [k], t0, dt, n_samples, which)[0]


def commutation_profile(model, state, scheme, ks, t0, dt, n_samples, which="F"):
    """:func:`commutation_check` for several bands, sharing the sampled trace and its FFT."""
    ks = list(ks)
    for k in ks:
        check_resolution(dt, scheme, k, which)
    R = obs_factor(model)
    times = t0 + dt * np.arange(int(n_samples))
    if isinstance(state, WaveState):
        P = np.exp(1j * np.outer(times, np.sqrt(state.lambdas)))
        blocks = [(P, state.uplus), (P.conj(), state.uminus)]
    else:
        blocks = [(np.exp(1j * np.outer(times, state.lambdas)), state.u0)]
    obs = sum(E @ (c[:, None] * R.T) for E, c in blocks)
    spec = np.fft.fft(obs, axis=0)
    tau = 2 * np.pi * np.fft.fftfreq(times.size, dt)
    out = []
    for k in ks:
        filtered = np.fft.ifft(band_filter(scheme, k, tau, which)[:, None] * spec, axis=0)
        uk = project_band(scheme, state, k, which)
        cs = [uk.uplus, uk.uminus] if isinstance(uk, WaveState) else [uk.u0]
        exact = sum(E @ (c[:, None] * R.T) for (E, _), c in zip(blocks, cs))
        out.append(float(np.sqrt(np.max(np.sum(np.abs(filtered - exact) ** 2, axis=1)))))
    return out


def h_norm(signal, T_window):
    """``sup_j |1_{I_j} w|_{L^2}`` with ``I_j = [j T, (j+1) T)``, rectangle rule.

    Windows only partly covered by the samples count with the samples they
    contain.
    """
    if signal.span < T_window * (1 - 1e-12):
        raise PreconditionError(f"signal span {signal.span:.6g} shorter than the window {T_window:.6g}")
    j = np.floor(signal.times / T_window).astype(np.int64)
    j -= j.min()
    e = np.sum(np.abs(signal.values) ** 2, axis=1) * signal.dt
    return float(np.sqrt(np.bincount(j, weights=e).max()))


@dataclass
class DecayTable:
    """Rows ``(k, h_k, r_k, slope_so_far)`` and the fitted log-log slope."""

    rows: list
    slope: float
    windowing: dict = field(default_factory=dict)

    def header(self):
        return ["k", "h_k", "r_k", "slope_so_far"]


def _fit_slope(h, r):
    h, r = np.asarray(h, dtype=float), np.asarray(r, dtype=float)
    if h.size < 2 or np.any(r <= 0):
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(r), 1)[0])


def decay_experiment(model, state, scheme, windowing, k_range, dt=2 * math.pi / 4096,
                     span=16 * math.pi, which="F"):
    """Measure ``r_k = |phi F_k(h_k D_t)((1 - psi) u)|_{L^2}`` across bands.

    The state is sampled on a grid of the given span centred on the middle of
    the window. The table's slope is the least-squares slope of
    ``log r_k`` against ``log h_k``.

    Parameters
    ----------
    k_range : iterable of int
    dt, span : float
        Grid step and total span of the time grid.
    """
    ks = list(k_range)
    for k in ks:
        check_resolution(dt, scheme, k, which)
    n = int(round(span / dt))
    t0 = windowing.T_window / 2 - n * dt / 2
    times = t0 + dt * np.arange(n)
    w = sample_state(state, times) * (1.0 - windowing.psi(times))[:, None]
    W = np.fft.fft(w, axis=0)
    del w
    tau = 2 * np.pi * np.fft.fftfreq(n, dt)
    phi2 = windowing.phi(times) ** 2
    hs, rs, rows = [], [], []
    for k in ks:
        m = band_filter(scheme, k, tau, which)
        v = np.fft.ifft(m[:, None] * W, axis=0)
        r = math.sqrt(float(np.sum(phi2 * np.sum(np.abs(v) ** 2, axis=1)) * dt))
        hs.append(scheme.h(k))
        rs.append(r)
        rows.append((k, scheme.h(k), r, _fit_slope(hs, rs)))
    return DecayTable(rows, _fit_slope(hs, rs), windowing.describe())


def tau_separation_ratios(scheme, k, samples):
    """Sampled ratios ``|tau - tau'|^-1 / min(h_k, |tau|^-1)`` for one band.

    ``tau'`` ranges over ``supp F_k(h_k .)`` and ``tau`` over the closure of
    ``{F_tilde_k(h_k .) != 1}`` (both on grids of ``samples`` points, plus the
    support and plateau edges); for each tau the nearest admissible tau' is
    used, which gives the largest ratio.
    """
    h, s = scheme.h(k), np.sign(k)
    al, at = scheme.alpha, scheme.a_tilde
    sig_p = np.linspace(al, 1 / al, int(samples))
    R = 4.0 / scheme.alpha_tilde
    sig = np.concatenate([np.linspace(-R, R, int(samples)), [at, 1 / at]])
    sig = sig[(sig <= at) | (sig >= 1 / at)]
    tau_p = np.sort(s * sig_p / h)
    tau = s * sig / h
    i = np.clip(np.searchsorted(tau_p, tau), 1, tau_p.size - 1)
    gap = np.minimum(np.abs(tau - tau_p[i - 1]), np.abs(tau - tau_p[i]))
    with np.errstate(divide="ignore"):
        inv_tau = np.where(tau == 0, np.inf, 1.0 / np.abs(tau))
    return 1.0 / (gap * np.minimum(h, inv_tau))


def tau_separation_profile(scheme, k_range, samples):
    """Per-band maxima of :func:`tau_separation_ratios`."""
    return [float(tau_separation_ratios(scheme, k, samples).max()) for k in k_range]


def tau_separation_check(scheme, k_range, samples):
    """Largest sampled ratio over all bands in ``k_range``."""
    return max(tau_separation_profile(scheme, k_range, samples))
