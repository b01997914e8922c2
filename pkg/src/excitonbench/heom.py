"""Hierarchy-of-equations reference solver for the Drude-Lorentz bath.

High-temperature variant: each site couples to an independent overdamped
bath through its population operator V_j = |j><j|; the bath correlation
is a single exponential, so the hierarchy carries one index per site.

    d sigma_n / dt = -i [H, sigma_n] - (sum_j n_j gam_j) sigma_n
                     + sum_j i V_j^x sigma_{n_j+}
                     + sum_j n_j (i a_j V_j^x + b_j V_j^o) sigma_{n_j-}

with a_j = 2 lam_j k_B T / hbar, b_j = lam_j gam_j, V^x the commutator
and V^o the anticommutator action.  Truncation is hard: indices above
the cutoff depth are treated as zero, and convergence is certified by
comparing adjacent depths.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import check_density_matrix


class IntegrationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# auxiliary-operator bookkeeping


@lru_cache(maxsize=32)
def enumerate_hierarchy(depth, n_baths=4):
    """All multi-indices with sum <= depth, graded lexicographic order."""
    levels = [[]]

    def extend(prefix, remaining, slots):
        if slots == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for v in range(remaining + 1):
            extend(prefix + [v], remaining - v, slots - 1)

    indices = []
    for total in range(depth + 1):
        out = []
        extend([], total, n_baths)
        indices.extend(out)
    return tuple(indices)


@lru_cache(maxsize=32)
def _neighbor_tables(depth, n_baths=4):
    indices = enumerate_hierarchy(depth, n_baths)
    lookup = {idx: i for i, idx in enumerate(indices)}
    n = len(indices)
    up = np.full((n, n_baths), -1, dtype=np.int64)
    down = np.full((n, n_baths), -1, dtype=np.int64)
    orders = np.array(indices, dtype=np.float64)
    for i, idx in enumerate(indices):
        for j in range(n_baths):
            raised = list(idx)
            raised[j] += 1
            key = tuple(raised)
            if key in lookup:
                up[i, j] = lookup[key]
            if idx[j] > 0:
                lowered = list(idx)
                lowered[j] -= 1
                down[i, j] = lookup[tuple(lowered)]
    return indices, up, down, orders


def adm_count(depth, exponentials, levels):
    """Exact number of auxiliary operators, (depth + K N)! / (depth! (K N)!)."""
    if depth < 0 or exponentials < 0 or levels < 0:
        raise ValueError("arguments must be non-negative")
    kn = exponentials * levels
    if kn < 1:
        raise ValueError("need K * N >= 1")
    return math.comb(depth + kn, depth)


@dataclass(frozen=True)
class StirlingBracket:
    estimate: float
    lower: float
    upper: float

    def contains(self, value):
        return self.lower <= value <= self.upper


def adm_count_stirling(depth, exponentials, levels):
    """Stirling-series estimate of adm_count with a rigorous bracket.

    Uses n! = sqrt(2 pi) n^(n+1/2) e^(-n) e^(r_n) with
    1/(12n+1) < r_n < 1/(12n); the bracket propagates the r bounds and is
    guaranteed to contain the exact count.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    kn = exponentials * levels
    if kn < 1:
        raise ValueError("need K * N >= 1")
    log_main = (
        0.5 * math.log((1.0 / depth + 1.0 / kn) / (2.0 * math.pi))
        + depth * math.log1p(kn / depth)
        + kn * math.log1p(depth / kn)
    )

    def r_lo(n):
        return 1.0 / (12.0 * n + 1.0)

    def r_hi(n):
        return 1.0 / (12.0 * n)

    def r_mid(n):
        return 0.5 * (r_lo(n) + r_hi(n))

    total = depth + kn
    mid = math.exp(log_main + r_mid(total) - r_mid(depth) - r_mid(kn))
    lower = math.exp(log_main + r_lo(total) - r_hi(depth) - r_hi(kn))
    upper = math.exp(log_main + r_hi(total) - r_lo(depth) - r_lo(kn))
    return StirlingBracket(mid, lower, upper)


def adm_count_asymptotic_log(depth, exponentials, levels):
    """log of the large-bath limit sqrt(1/(2 pi depth)) (1 + KN/depth)^depth e^KN."""
    kn = exponentials * levels
    if depth < 1 or kn < 1:
        raise ValueError("need depth >= 1 and K * N >= 1")
    return (
        -0.5 * math.log(2.0 * math.pi * depth)
        + depth * math.log1p(kn / depth)
        + kn
    )


# ---------------------------------------------------------------------------
# hierarchy state and right-hand side


@dataclass
class HierarchyState:
    """Flat stack of auxiliary matrices plus the bath that generated them.

    matrices[k] is the 4x4 block for enumerate_hierarchy(depth)[k];
    matrices[0] is the reduced density matrix.  temperature is k_B T / hbar
    in rad/s, reorganization/relaxation are per-site arrays in rad/s.
    """

    matrices: np.ndarray
    depth: int
    reorganization: np.ndarray
    relaxation: np.ndarray
    temperature: float

    @classmethod
    def from_density_matrix(cls, rho, depth, reorganization, relaxation, temperature):
        if temperature <= 0:
            raise ValueError("temperature must be positive (beta > 0)")
        lam = np.broadcast_to(np.asarray(reorganization, dtype=float), (4,)).copy()
        gam = np.broadcast_to(np.asarray(relaxation, dtype=float), (4,)).copy()
        check_density_matrix(rho)
        n = len(enumerate_hierarchy(depth))
        mats = np.zeros((n, 4, 4), dtype=complex)
        mats[0] = rho
        return cls(mats, depth, lam, gam, float(temperature))

    @property
    def indices(self):
        return enumerate_hierarchy(self.depth)

    def reduced(self):
        return self.matrices[0].copy()


def _coefficient_tables(depth, reorganization, relaxation, temperature, scaled):
    """Ladder coefficients per (block, site).

    Unscaled: raising couples with Phi_j = i V_j^x and lowering with
    n_j Theta_j, Theta_j = i a_j V_j^x + b_j V_j^o, a_j = 2 lam_j T,
    b_j = lam_j gam_j.  The "row" coefficient multiplies V_j sigma, the
    "col" coefficient sigma V_j.

    Scaled: blocks are divided by sqrt(prod_j n_j! c_j^{n_j}) with
    c_j = |a_j - i b_j|, which symmetrizes the ladder to sqrt(n c)
    couplings.  Hard truncation then discards only components that are
    small in the physical normalization, which converges far faster for
    slow strong baths.  The reduced block (all n_j = 0) is untouched.
    """
    _, up, down, orders = _neighbor_tables(depth)
    a = 2.0 * reorganization * temperature
    b = reorganization * relaxation
    damping = orders @ relaxation
    if not scaled:
        cup_row = np.broadcast_to(1j, orders.shape).astype(complex)
        cup_col = np.broadcast_to(-1j, orders.shape).astype(complex)
        cdn_row = orders * (1j * a + b)
        cdn_col = orders * (-1j * a + b)
    else:
        c = np.hypot(a, b)
        safe_c = np.where(c > 0, c, 1.0)
        cup_row = 1j * np.sqrt((orders + 1.0) * c)
        cup_col = -1j * np.sqrt((orders + 1.0) * c)
        root = np.sqrt(orders / safe_c) * (c > 0)
        cdn_row = root * (1j * a + b)
        cdn_col = root * (-1j * a + b)
    return (
        up,
        down,
        damping,
        np.ascontiguousarray(cup_row, dtype=complex),
        np.ascontiguousarray(cup_col, dtype=complex),
        np.ascontiguousarray(cdn_row, dtype=complex),
        np.ascontiguousarray(cdn_col, dtype=complex),
    )


def heom_rhs(state, hamiltonian):
    """Time derivative of a HierarchyState under the given Hamiltonian.

    Operates in the physical (unscaled) normalization of the auxiliary
    blocks; the propagator may rescale internally but always accepts and
    returns physical states.
    """
    up, down, damping, cur, cuc, cdr, cdc = _coefficient_tables(
        state.depth,
        state.reorganization,
        state.relaxation,
        state.temperature,
        scaled=False,
    )
    out = np.empty_like(state.matrices)
    _kernels.hierarchy_rhs(
        np.ascontiguousarray(state.matrices),
        out,
        np.ascontiguousarray(np.asarray(hamiltonian, dtype=complex)),
        up,
        down,
        damping,
        cur,
        cuc,
        cdr,
        cdc,
    )
    return HierarchyState(
        out, state.depth, state.reorganization, state.relaxation, state.temperature
    )


@dataclass
class IntegratorConfig:
    """Fixed-step classical Runge-Kutta settings.

    step: explicit step in seconds, or None for the automatic choice
    2 pi / (safety * omega_max) where omega_max bounds the spectral radius
    of the full hierarchy generator.  scaled_hierarchy selects the
    rescaled auxiliary normalization (recommended; truncation converges
    much faster for slow baths and the reduced block is unaffected).
    """

    step: float | None = None
    safety: float = 20.0
    trace_tolerance: float = 1e-6
    halving_check: bool = False
    scaled_hierarchy: bool = True


def _auto_step(h, state, safety):
    h_tl = h - np.trace(h) / 4.0 * np.eye(4)
    radius = np.abs(np.linalg.eigvalsh(h_tl)).max()
    sigma = np.sqrt(2.0 * state.reorganization * state.temperature)
    ladder = np.sqrt(state.depth + 1.0) * sigma.max()
    damping = (state.depth + 1.0) * state.relaxation.max()
    omega_max = radius + ladder + damping
    return 2.0 * np.pi / (safety * omega_max)


def heom_propagate(state, hamiltonian, t_grid, config=None):
    """Integrate the hierarchy and return the reduced matrix on t_grid.

    t_grid must be strictly increasing from 0; the first output row is the
    initial state.  Raises IntegrationError naming the offending step if
    the trace of the reduced matrix drifts beyond the configured bound.
    """
    config = config or IntegratorConfig()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing and start at 0")
    h = np.asarray(hamiltonian, dtype=complex)
    # A uniform energy shift only changes a global phase; removing it
    # keeps the stability limit set by the physical level splittings.
    h = np.ascontiguousarray(h - np.trace(h) / 4.0 * np.eye(4))

    up, down, damping, cur, cuc, cdr, cdc = _coefficient_tables(
        state.depth,
        state.reorganization,
        state.relaxation,
        state.temperature,
        scaled=config.scaled_hierarchy,
    )
    y = np.ascontiguousarray(state.matrices.astype(complex))
    # Only the reduced block is nonzero initially, so the scaled and
    # physical normalizations agree on the initial stack.
    if config.scaled_hierarchy and np.any(y[1:] != 0):
        raise ValueError("scaled propagation requires a freshly seeded hierarchy")

    base_step = config.step if config.step is not None else _auto_step(h, state, config.safety)

    out = np.empty((len(t_grid), 4, 4), dtype=complex)
    out[0] = y[0]
    t_prev = t_grid[0]
    for i_out in range(1, len(t_grid)):
        span = t_grid[i_out] - t_prev
        n_sub = max(1, int(np.ceil(span / base_step)))
        hstep = span / n_sub
        _kernels.hierarchy_rk4(
            y, h, up, down, damping, cur, cuc, cdr, cdc, hstep, n_sub
        )
        drift = abs(np.trace(y[0]).real - 1.0) + abs(np.trace(y[0]).imag)
        if drift > config.trace_tolerance:
            raise IntegrationError(
                f"trace drift {drift:.3e} beyond {config.trace_tolerance:.1e} "
                f"at t = {t_grid[i_out]:.6e} s (output step {i_out}); "
                "reduce the integrator step"
            )
        out[i_out] = y[0]
        t_prev = t_grid[i_out]

    return out


def populations(rhos):
    return np.real(np.einsum("...ii->...i", rhos))


def solve_heom(
    hamiltonian,
    rho0,
    t_grid,
    reorganization,
    relaxation,
    temperature,
    depth=None,
    max_depth=12,
    start_depth=6,
    convergence_tol=1e-4,
    config=None,
):
    """Depth-certified hierarchy solve.

    With depth=None, runs at increasing truncation depth until the maximum
    population difference against the next depth falls below
    convergence_tol (capped at max_depth).  Returns (rhos, info) where
    info records the depth used and the convergence metric.
    """

    def run(d):
        st = HierarchyState.from_density_matrix(
            rho0, d, reorganization, relaxation, temperature
        )
        return heom_propagate(st, hamiltonian, t_grid, config=config)

    if depth is not None:
        rhos = run(depth)
        return rhos, {"depth": depth, "convergence": None}

    d = start_depth
    prev = run(d)
    while True:
        nxt = run(d + 1)
        metric = float(np.abs(populations(nxt) - populations(prev)).max())
        if metric < convergence_tol or d + 1 >= max_depth:
            return nxt, {
                "depth": d + 1,
                "convergence": metric,
                "converged": metric < convergence_tol,
            }
        prev = nxt
        d += 1
