"""Stochastic ensemble propagation under sliced exact exponentials.

One realization draws a noise trajectory, evolves the initial state with
the product of exact slice propagators U_j = exp(-i H_j dt), and is
therefore exactly unitary; decoherence appears only in the average over
realizations.  Realization k of a run with master seed s is keyed by the
seed sequence (s, k), so any subset of the ensemble is reproducible in
isolation and the average is independent of evaluation order.
"""

from dataclasses import dataclass

import numpy as np

from . import bathnoise
from ._kernels import propagate_realizations
from .linalg import check_density_matrix, expm_hermitian, pairwise_sum


def realization_seed(master_seed, k):
    return np.random.SeedSequence([int(master_seed), int(k)])


def propagate_realization(h_sys, trajectory, rho0, t_grid):
    """Unitary time series of a single noisy realization.

    The trajectory must be sampled on t_grid; slice j spans
    [t_j, t_{j+1}] and uses the noise value at its left endpoint.
    Returns rho(t) on the full grid, starting from rho0.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if trajectory.t_grid.shape != t_grid.shape or not np.array_equal(
        trajectory.t_grid, t_grid
    ):
        raise ValueError("trajectory grid does not match the requested grid")
    steps = np.diff(t_grid)
    dt = steps[0]
    if not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise ValueError("t_grid must be uniform")
    shifts = bathnoise.site_shifts(trajectory)[:-1]  # left endpoints
    h = np.ascontiguousarray(np.asarray(h_sys, dtype=complex))
    rho0 = np.ascontiguousarray(np.asarray(rho0, dtype=complex))
    out = np.empty((1, len(t_grid), 4, 4), dtype=complex)
    propagate_realizations(h, shifts[None, :, :], dt, rho0, 1, out)
    return out[0]


@dataclass
class EnsembleResult:
    """Averaged open-system dynamics with per-element standard errors."""

    times: np.ndarray
    mean: np.ndarray  # (T, 4, 4) complex
    std_error: np.ndarray  # (T, 4, 4) real, elementwise SE of the mean
    n_realizations: int
    master_seed: int

    def populations(self):
        return np.real(np.einsum("tii->ti", self.mean))

    def population_std_error(self):
        return np.einsum("tii->ti", self.std_error).real


def ensemble_average(
    h_sys,
    recipe,
    rho0,
    t_grid,
    n_realizations,
    master_seed=0,
    out_every=1,
    noise_hold=1,
    batch_size=64,
    seed_offset=0,
):
    """Average n unitary realizations into an open-system density matrix.

    out_every  : record every out_every-th slice boundary (plus t = 0)
    noise_hold : evaluate the noise comb every noise_hold slices and hold
                 it constant in between (the comb band is far slower than
                 the slicing, so holding is lossless in practice)

    The reduction over realizations is a fixed binary tree keyed by
    realization index, so results do not depend on batch size and
    reordering perturbs them only at the 1e-12 level.
    """
    if n_realizations < 1:
        raise ValueError("need at least one realization")
    t_grid = np.asarray(t_grid, dtype=float)
    steps = np.diff(t_grid)
    dt = float(steps[0])
    if not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise ValueError("t_grid must be uniform")
    n_slices = len(t_grid) - 1
    if n_slices % out_every != 0:
        raise ValueError("out_every must divide the number of slices")
    check_density_matrix(rho0)
    h = np.ascontiguousarray(np.asarray(h_sys, dtype=complex))
    rho0 = np.ascontiguousarray(np.asarray(rho0, dtype=complex))

    if noise_hold > 1:
        n_noise = int(np.ceil(n_slices / noise_hold))
        noise_grid = t_grid[0] + dt * noise_hold * np.arange(n_noise)
        expand = np.repeat(np.arange(n_noise), noise_hold)[:n_slices]
    else:
        noise_grid = t_grid[:-1]
        expand = None

    n_out = n_slices // out_every + 1
    sums = []
    sq_sums = []
    done = 0
    while done < n_realizations:
        b = min(batch_size, n_realizations - done)
        shifts = np.empty((b, n_slices, 4))
        for i in range(b):
            traj = bathnoise.sample_trajectory(
                recipe, realization_seed(master_seed, seed_offset + done + i), noise_grid
            )
            s = bathnoise.site_shifts(traj)
            shifts[i] = s[expand] if expand is not None else s
        rho_out = np.empty((b, n_out, 4, 4), dtype=complex)
        propagate_realizations(h, shifts, dt, rho0, out_every, rho_out)
        sums.append(pairwise_sum(list(rho_out)))
        sq_sums.append(pairwise_sum(list(np.abs(rho_out) ** 2)))
        done += b
    total = pairwise_sum(sums)
    total_sq = pairwise_sum(sq_sums)
    mean = total / n_realizations
    if n_realizations > 1:
        var = (total_sq / n_realizations - np.abs(mean) ** 2) * (
            n_realizations / (n_realizations - 1)
        )
        se = np.sqrt(np.maximum(var, 0.0) / n_realizations)
    else:
        se = np.zeros_like(mean, dtype=float)
    times = t_grid[::out_every]
    return EnsembleResult(times, mean, se, n_realizations, master_seed)


def closed_form_unitary_series(h_sys, rho0, t_grid):
    """Noise-free oracle: rho(t) = e^{-iHt} rho0 e^{+iHt} by direct exponential."""
    out = np.empty((len(t_grid), 4, 4), dtype=complex)
    for i, t in enumerate(t_grid):
        u = expm_hermitian(np.asarray(h_sys, dtype=complex), t)
        out[i] = u @ rho0 @ u.conj().T
    return out


def population_deviation(result_a, pops_b):
    """Max absolute population difference between two runs on one grid."""
    pa = result_a.populations() if hasattr(result_a, "populations") else result_a
    return float(np.abs(np.asarray(pa) - np.asarray(pops_b)).max())


def convergence_study(
    h_sys,
    recipe,
    rho0,
    t_grid,
    n_list,
    reference_populations,
    master_seed=0,
    out_every=1,
    noise_hold=1,
):
    """Deviation against a reference solution versus ensemble size.

    Each entry of n_list runs on a disjoint block of realization keys, so
    the points are statistically independent draws from the same process.
    Returns (n_array, deviation_array, fit) where fit holds the
    least-squares coefficient of a c/sqrt(N) model and its R^2.
    """
    n_list = list(n_list)
    devs = []
    offset = 0
    for n in n_list:
        res = ensemble_average(
            h_sys,
            recipe,
            rho0,
            t_grid,
            n,
            master_seed=master_seed,
            out_every=out_every,
            noise_hold=noise_hold,
            seed_offset=offset,
        )
        offset += n
        devs.append(population_deviation(res, reference_populations))
    n_arr = np.asarray(n_list, dtype=float)
    dev_arr = np.asarray(devs)
    x = 1.0 / np.sqrt(n_arr)
    c = float((x @ dev_arr) / (x @ x))
    resid = dev_arr - c * x
    ss_tot = float(np.sum((dev_arr - dev_arr.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return n_arr.astype(int), dev_arr, {"coefficient": c, "r_squared": r2}
