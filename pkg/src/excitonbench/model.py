"""Chain geometry, excitonic Hamiltonian, and bath spectral densities.

The model is a collinear four-site chain: two donor sites on the left,
two acceptor sites on the right, transition dipoles perpendicular to the
chain axis.  All energies are angular frequencies (rad/s); the physical
(EET) frame and the spin-simulator (NMR) frame differ by the exact
dimensionless factor ``scale_factor``: H_NMR = H_EET / C, and likewise
for every rate and for temperature.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .constants import (
    ANGSTROM,
    DEBYE,
    DEFAULT_SCALE_FACTOR,
    EPSILON_0,
    HBAR,
    KELVIN_TO_ANGULAR,
    WAVENUMBER_TO_ANGULAR,
)


class Frame(enum.Enum):
    EET = "EET"
    NMR = "NMR"


@dataclass(frozen=True)
class UnitSystem:
    """Conversions into the angular-frequency unit of the active frame.

    Quantities quoted in laboratory units that belong to the physical
    system (wavenumbers) are EET-frame; converting them while the NMR
    frame is active divides by the scale factor.  Hertz and Kelvin inputs
    are taken to be quoted in the *active* frame already (e.g. the
    simulator bath is specified directly as gamma_NMR in Hz and T_NMR in
    K), so they are never rescaled.
    """

    frame: Frame = Frame.EET
    scale_factor: float = DEFAULT_SCALE_FACTOR

    def _frame_div(self):
        return self.scale_factor if self.frame is Frame.NMR else 1.0

    def wavenumbers(self, x):
        """cm^-1 (physical) -> rad/s in the active frame."""
        return np.asarray(x) * WAVENUMBER_TO_ANGULAR / self._frame_div()

    def to_wavenumbers(self, omega):
        return np.asarray(omega) * self._frame_div() / WAVENUMBER_TO_ANGULAR

    def hertz(self, f):
        """Ordinary frequency in the active frame -> rad/s."""
        return 2.0 * np.pi * np.asarray(f)

    def to_hertz(self, omega):
        return np.asarray(omega) / (2.0 * np.pi)

    def kelvin(self, t):
        """Temperature in the active frame -> k_B T / hbar in rad/s."""
        return np.asarray(t) * KELVIN_TO_ANGULAR

    def to_kelvin(self, omega):
        return np.asarray(omega) / KELVIN_TO_ANGULAR

    def debye(self, mu):
        return np.asarray(mu) * DEBYE

    def angstrom(self, r):
        return np.asarray(r) * ANGSTROM

    def convert(self, omega, to_frame):
        """Move an angular frequency (or active-frame temperature) between frames."""
        if to_frame is self.frame:
            return omega
        if to_frame is Frame.NMR:
            return omega / self.scale_factor
        return omega * self.scale_factor


def dipole_coupling(r_vec, mu_i, mu_j):
    """Point dipole-dipole interaction as an angular frequency (rad/s).

    r_vec : displacement vector between the sites (m)
    mu_i, mu_j : transition dipole vectors (C m)

    J = [mu_i . mu_j - 3 (mu_i . r_hat)(mu_j . r_hat)] / (4 pi eps0 r^3),
    divided by hbar.  Vacuum permittivity, no dielectric screening.
    """
    r_vec = np.asarray(r_vec, dtype=float)
    r = np.linalg.norm(r_vec)
    if r == 0.0:
        raise ValueError("dipole coupling undefined at zero separation")
    rhat = r_vec / r
    mu_i = np.asarray(mu_i, dtype=float)
    mu_j = np.asarray(mu_j, dtype=float)
    num = mu_i @ mu_j - 3.0 * (mu_i @ rhat) * (mu_j @ rhat)
    return num / (4.0 * np.pi * EPSILON_0 * r**3) / HBAR


@dataclass(frozen=True)
class ExcitonSystem:
    """Four-site chain: energies, geometry, dipoles, and the frame scale.

    site_energies : (4,) rad/s, EET frame
    positions     : (4, 3) m, strictly increasing along the x axis
    dipoles       : (4, 3) C m
    """

    site_energies: np.ndarray
    positions: np.ndarray
    dipoles: np.ndarray
    scale_factor: float = DEFAULT_SCALE_FACTOR

    def __post_init__(self):
        se = np.asarray(self.site_energies, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        dip = np.asarray(self.dipoles, dtype=float)
        if se.shape != (4,) or pos.shape != (4, 3) or dip.shape != (4, 3):
            raise ValueError("expected 4 site energies, 4 positions, 4 dipoles")
        if not np.all(np.diff(pos[:, 0]) > 0):
            raise ValueError("site positions must be strictly increasing along x")
        for name, arr in (("site_energies", se), ("positions", pos), ("dipoles", dip)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def tetramer_chain(
    r_angstrom,
    total_length_angstrom=40.0,
    site_energies_cm=(13000.0, 12900.0, 12300.0, 12200.0),
    dipole_debye=7.75,
    orientation=(0.0, 0.0, 1.0),
    scale_factor=DEFAULT_SCALE_FACTOR,
):
    """Collinear donor-pair / acceptor-pair geometry.

    Sites sit at x = 0, r, R - r, R.  The intra-pair distance r must
    satisfy 2 r < R so the pairs do not cross.  All dipoles share one
    orientation, by default perpendicular to the chain axis.
    """
    r = float(r_angstrom)
    big_r = float(total_length_angstrom)
    if not 0 < 2 * r < big_r:
        raise ValueError(f"need 0 < 2r < R, got r={r} A, R={big_r} A")
    ori = np.asarray(orientation, dtype=float)
    norm = np.linalg.norm(ori)
    if norm == 0:
        raise ValueError("dipole orientation must be a nonzero vector")
    ori = ori / norm
    x = np.array([0.0, r, big_r - r, big_r]) * ANGSTROM
    positions = np.zeros((4, 3))
    positions[:, 0] = x
    dipoles = np.tile(ori * dipole_debye * DEBYE, (4, 1))
    energies = np.asarray(site_energies_cm, dtype=float) * WAVENUMBER_TO_ANGULAR
    return ExcitonSystem(energies, positions, dipoles, scale_factor)


def coupling_matrix(system, frame=Frame.EET):
    """Pairwise dipole couplings (rad/s), zero diagonal, real symmetric."""
    j = np.zeros((4, 4))
    for a in range(4):
        for b in range(a + 1, 4):
            val = dipole_coupling(
                system.positions[b] - system.positions[a],
                system.dipoles[a],
                system.dipoles[b],
            )
            j[a, b] = j[b, a] = val
    if frame is Frame.NMR:
        j = j / system.scale_factor
    return j


def build_hamiltonian(system, frame=Frame.EET):
    """Single-excitation Hamiltonian: site energies + dipole couplings."""
    h = coupling_matrix(system, frame=Frame.EET) + np.diag(system.site_energies)
    if frame is Frame.NMR:
        h = h / system.scale_factor
    return h


@dataclass(frozen=True)
class DrudeLorentz:
    """Overdamped bath, J(w) = 2 lam gam w / (w^2 + gam^2); peak at gam.

    reorganization (lam) and relaxation_rate (gam) are angular frequencies
    in the active frame.
    """

    reorganization: float
    relaxation_rate: float

    def __post_init__(self):
        if self.reorganization < 0 or self.relaxation_rate <= 0:
            raise ValueError("need reorganization >= 0 and relaxation_rate > 0")

    @property
    def peak_frequency(self):
        return self.relaxation_rate

    def reorganization_energy(self):
        return self.reorganization


@dataclass(frozen=True)
class PowerLaw:
    """Ohmic family, J(w) = lam w / Gamma(s) (w/w_c)^(s-1) exp(-w/w_c).

    coupling (lam) is dimensionless; exponent s > 0 selects sub-Ohmic
    (s < 1), Ohmic (s = 1) or super-Ohmic (s > 1); cutoff is w_c in rad/s.
    The peak sits at s * w_c and the reorganization integral is lam * w_c.
    """

    coupling: float
    exponent: float
    cutoff: float

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("power-law exponent must be positive")
        if self.coupling < 0 or self.cutoff <= 0:
            raise ValueError("need coupling >= 0 and cutoff > 0")

    @property
    def peak_frequency(self):
        return self.exponent * self.cutoff

    def reorganization_energy(self):
        return self.coupling * self.cutoff


SpectralDensity = DrudeLorentz | PowerLaw


def evaluate_spectral_density(density, omega):
    """J(omega) for omega >= 0 (rad/s in, rad/s out)."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("spectral density defined for omega >= 0 only")
    if isinstance(density, DrudeLorentz):
        lam, gam = density.reorganization, density.relaxation_rate
        return 2.0 * lam * gam * omega / (omega**2 + gam**2)
    if isinstance(density, PowerLaw):
        from scipy.special import gamma as gamma_fn

        lam, s, wc = density.coupling, density.exponent, density.cutoff
        x = omega / wc
        with np.errstate(divide="ignore", invalid="ignore"):
            val = lam * omega / gamma_fn(s) * x ** (s - 1.0) * np.exp(-x)
        return np.where(omega == 0.0, 0.0, val)
    raise TypeError(f"unknown spectral density {type(density).__name__}")
