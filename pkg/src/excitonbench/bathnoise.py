"""Colored dephasing noise matched to a target bath spectral density.

The synthesizer realizes a classical stationary Gaussian-like process as
a dense comb of cosines on the harmonics of a base frequency w0,

    beta(t) = sum_j alpha F(w_j) w_j cos(w_j t + phi_j),   w_j = j w0,

with one independent uniform phase per (channel, line).  The line
amplitudes are shaped so the coarse-grained power spectral density of
beta equals the classical high-temperature fluctuation spectrum of the
target bath,

    S(w) = (2 k_B T / hbar) J(w) / w,

which for a Drude-Lorentz bath reproduces the exponential correlation
function 2 lam (k_B T/hbar) exp(-gam |tau|) that the hierarchy solver
assumes.  Trajectories are reproducible: a counter-based generator keyed
by (seed) fixes every phase.
"""

from dataclasses import dataclass
import enum

import numpy as np
from scipy.signal import CZT

from .constants import KELVIN_TO_ANGULAR
from .linalg import DIAG_IZ, DIAG_ZI, DIAG_ZZ
from .model import DrudeLorentz, PowerLaw, evaluate_spectral_density


class ChannelStructure(enum.Enum):
    #: one independent energy-shift series per site, global mean removed
    FOUR_SITE_INDEPENDENT = "four_site"
    #: literal two-channel form beta1 * ZI + beta2 * IZ
    TWO_CHANNEL = "two_channel"


def target_psd(density, temperature_kelvin, omega):
    """Two-sided classical noise PSD matching the bath at temperature T.

    S(w) = (2 k_B T / hbar) J(w) / w for w > 0, with the w -> 0 limit
    filled in analytically where it is finite.
    """
    if temperature_kelvin <= 0:
        raise ValueError("temperature must be positive")
    t_ang = temperature_kelvin * KELVIN_TO_ANGULAR
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("PSD defined for omega >= 0 only")
    scalar = omega.ndim == 0
    om = np.atleast_1d(omega).astype(float)
    out = np.empty_like(om)
    pos = om > 0
    out[pos] = 2.0 * t_ang * evaluate_spectral_density(density, om[pos]) / om[pos]
    if np.any(~pos):
        if isinstance(density, DrudeLorentz):
            zero_val = 4.0 * density.reorganization * t_ang / density.relaxation_rate
        elif isinstance(density, PowerLaw):
            s = density.exponent
            if s > 1:
                zero_val = 0.0
            elif s == 1:
                zero_val = 2.0 * density.coupling * t_ang
            else:
                zero_val = np.inf
        else:
            raise TypeError(f"unknown spectral density {type(density).__name__}")
        out[~pos] = zero_val
    return out[0] if scalar else out


@dataclass(frozen=True)
class NoiseRecipe:
    """Comb parameters for one bath-noise synthesis.

    base_frequency is w0 (rad/s), n_lines the cutoff index N_c (the comb
    spans [w0, N_c w0]), amplitude the overall alpha_z knob (the product
    alpha_z * F is what matters, so the default 1 puts all shaping in F).
    """

    target: object
    temperature_kelvin: float
    base_frequency: float
    n_lines: int
    amplitude: float = 1.0
    channels: ChannelStructure = ChannelStructure.FOUR_SITE_INDEPENDENT

    def __post_init__(self):
        if self.base_frequency <= 0:
            raise ValueError("base frequency must be positive")
        if self.n_lines < 1:
            raise ValueError("need at least one comb line")
        if self.temperature_kelvin <= 0:
            raise ValueError("temperature must be positive")
        band_edge = self.n_lines * self.base_frequency
        peak = self.target.peak_frequency
        if band_edge < 5.0 * peak:
            raise ValueError(
                f"comb band edge {band_edge:.3e} rad/s does not cover the "
                f"target spectral density (need >= 5x peak {peak:.3e} rad/s)"
            )

    @property
    def line_frequencies(self):
        return self.base_frequency * np.arange(1, self.n_lines + 1)

    @property
    def n_channels(self):
        return 4 if self.channels is ChannelStructure.FOUR_SITE_INDEPENDENT else 2


def recipe_for(
    density,
    temperature_kelvin,
    base_frequency_hz=0.1,
    band_multiple=10.0,
    band_edge_hz=None,
    amplitude=1.0,
    channels=ChannelStructure.FOUR_SITE_INDEPENDENT,
):
    """Build a NoiseRecipe with the default band rule.

    Unless band_edge_hz is given, the comb extends to band_multiple times
    the target's peak frequency (>= 10x relaxation rate or cutoff by
    default).
    """
    w0 = 2.0 * np.pi * base_frequency_hz
    if band_edge_hz is not None:
        edge = 2.0 * np.pi * band_edge_hz
    else:
        edge = band_multiple * density.peak_frequency
    n_lines = int(np.ceil(edge / w0))
    return NoiseRecipe(density, temperature_kelvin, w0, n_lines, amplitude, channels)


def modulation_profile(recipe):
    """Line-shaping function F(w_j), j = 1..N_c.

    Chosen so the delta-comb PSD, coarse-grained over one line spacing,
    reproduces the target PSD:  alpha F(w_j) w_j = sqrt(2 w0 S(w_j) / pi).
    """
    w = recipe.line_frequencies
    s = target_psd(recipe.target, recipe.temperature_kelvin, w)
    return np.sqrt(2.0 * recipe.base_frequency * s / np.pi) / (recipe.amplitude * w)


def line_amplitudes(recipe):
    """alpha F(w_j) w_j, the cosine amplitudes of the comb."""
    return recipe.amplitude * modulation_profile(recipe) * recipe.line_frequencies


def trajectory_variance(recipe):
    """Exact <beta^2> of one channel, sum of A_j^2 / 2 over the comb."""
    a = line_amplitudes(recipe)
    return float(0.5 * np.sum(a * a))


def amplitude_bound(recipe):
    """Triangle-inequality bound sum_j A_j on |beta(t)|."""
    return float(np.sum(line_amplitudes(recipe)))


@dataclass(frozen=True)
class NoiseTrajectory:
    """Sampled beta(t) per channel with full provenance."""

    channels: np.ndarray  # (n_channels, len(t_grid)) rad/s
    t_grid: np.ndarray
    seed: object
    recipe: NoiseRecipe


def _channel_phases(recipe, seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.uniform(0.0, 2.0 * np.pi, size=(recipe.n_channels, recipe.n_lines))


def _synthesize(recipe, phases, t_grid):
    """Evaluate the cosine comb on a uniform grid via one chirp-z transform.

    beta(t_n) = Re sum_j c_j exp(i j w0 dt n) with c_j = A_j e^{i phi_j}
    and a t0 offset folded into the coefficients.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 2:
        raise ValueError("need at least two grid points")
    steps = np.diff(t_grid)
    dt = steps[0]
    if not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise ValueError("t_grid must be uniform")
    amps = line_amplitudes(recipe)
    j = np.arange(1, recipe.n_lines + 1)
    coeffs = np.zeros((phases.shape[0], recipe.n_lines + 1), dtype=complex)
    coeffs[:, 1:] = amps * np.exp(1j * (phases + j * recipe.base_frequency * t_grid[0]))
    transform = CZT(
        n=recipe.n_lines + 1,
        m=t_grid.size,
        w=np.exp(1j * recipe.base_frequency * dt),
        a=1.0,
    )
    return np.real(transform(coeffs))


def sample_trajectory(recipe, seed, t_grid):
    """Deterministic noise sample: identical (seed, recipe, grid) in,
    bit-identical series out."""
    phases = _channel_phases(recipe, seed)
    beta = _synthesize(recipe, phases, np.asarray(t_grid, dtype=float))
    return NoiseTrajectory(beta, np.asarray(t_grid, dtype=float), seed, recipe)


def site_shifts(trajectory):
    """Per-site diagonal energy shifts (len(t), 4) implied by the channels.

    Four-site mode subtracts the instantaneous global mean, which only
    removes a global phase; two-channel mode expands beta1 ZI + beta2 IZ.
    """
    ch = trajectory.channels
    if trajectory.recipe.channels is ChannelStructure.FOUR_SITE_INDEPENDENT:
        return (ch - ch.mean(axis=0)).T.copy()
    b1, b2 = ch
    return np.outer(b1, DIAG_ZI) + np.outer(b2, DIAG_IZ)


def noise_hamiltonian(trajectory, t_index):
    """4x4 dephasing Hamiltonian at one grid index.

    The diagonal shift vector is assembled from its components on the
    traceless diagonal operators (ZI, IZ, ZZ), which reconstruct it
    exactly once the global mean is removed.
    """
    e = site_shifts(trajectory)[t_index]
    a = e @ DIAG_ZI / 4.0
    b = e @ DIAG_IZ / 4.0
    c = e @ DIAG_ZZ / 4.0
    return np.diag(a * DIAG_ZI + b * DIAG_IZ + c * DIAG_ZZ).astype(complex)


def comb_correlation(recipe, tau):
    """Ensemble correlation function of one channel, sum_j A_j^2/2 cos(w_j tau)."""
    a = line_amplitudes(recipe)
    w = recipe.line_frequencies
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    return 0.5 * np.cos(np.outer(tau, w)) @ (a * a)


def empirical_psd(
    recipe,
    n_trajectories,
    master_seed=0,
    resolution_hz=None,
    sample_rate_hz=None,
):
    """Ensemble-averaged periodogram of synthesized trajectories.

    Works on a dedicated audit grid: the window is long enough to resolve
    the target's features and the rate samples the full comb band.
    Returns (omega_bins, psd) for the positive-frequency bins.
    """
    band_edge = recipe.n_lines * recipe.base_frequency
    peak = recipe.target.peak_frequency
    if resolution_hz is None:
        resolution_hz = max(peak / (2.0 * np.pi) / 12.0, 0.5)
    if sample_rate_hz is None:
        sample_rate_hz = 3.0 * band_edge / (2.0 * np.pi)
    dt = 1.0 / sample_rate_hz
    n = int(2 ** np.ceil(np.log2(sample_rate_hz / resolution_hz)))
    t_grid = np.arange(n) * dt
    seeds = np.random.SeedSequence(master_seed).spawn(n_trajectories)
    acc = None
    for k in range(n_trajectories):
        traj = sample_trajectory(recipe, seeds[k], t_grid)
        x = traj.channels[0]
        spec = np.fft.rfft(x)
        p = (np.abs(spec) ** 2) * dt / n
        acc = p if acc is None else acc + p
    acc /= n_trajectories
    freqs = np.fft.rfftfreq(n, dt) * 2.0 * np.pi
    return freqs, acc


def psd_relative_l2(recipe, freqs, psd, n_bands=50):
    """Band-averaged relative L2 distance between measured and target PSD.

    Both sides are averaged over the same frequency bands across the comb
    support [w0, N_c w0] before the norm, so the comparison is unbiased
    with respect to bin placement.
    """
    lo = recipe.base_frequency
    hi = recipe.n_lines * recipe.base_frequency
    edges = np.linspace(lo, hi, n_bands + 1)
    meas = np.empty(n_bands)
    tgt = np.empty(n_bands)
    centers = np.empty(n_bands)
    for i in range(n_bands):
        sel = (freqs >= edges[i]) & (freqs < edges[i + 1])
        if not np.any(sel):
            meas[i] = np.nan
            tgt[i] = np.nan
            centers[i] = 0.5 * (edges[i] + edges[i + 1])
            continue
        meas[i] = psd[sel].mean()
        tgt[i] = target_psd(recipe.target, recipe.temperature_kelvin, freqs[sel]).mean()
        centers[i] = freqs[sel].mean()
    ok = ~np.isnan(meas)
    err = np.linalg.norm(meas[ok] - tgt[ok]) / np.linalg.norm(tgt[ok])
    return float(err), centers[ok], tgt[ok], meas[ok]
