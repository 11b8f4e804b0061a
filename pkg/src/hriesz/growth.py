"""Densities, high-density cube selection, the witness-set iteration and the
growth diagnostics built on top of them.

The pipeline mirrors the mechanism behind the growth theorem: a cube whose
(D-1)-density is large spawns, N = floor(log2(density) / A^2) generations
down, a family of descendants whose density more than doubles.  That family
retains most of the mass, packs like a two-dimensional set (sum of squared
sidelengths stays bounded), and concentrates in a thin vertical tube.
Iterating the selection produces nested families whose intersection is a
positive-mass set of covering dimension at most 2 - the witness that rules
out bounded operator norms once the measure charges low-dimensional sets.

Theoretical constants make the thresholds astronomical (the proofs want
A >= 5D and dominating M); experiments run at much smaller "experimental
constants" and verify the conclusions numerically instead of asserting them.
Reports carry an `experimental_constants` flag whenever A < 5D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DensityBelowThreshold
from .group import HPoint
from .lattice import CubeId, cube_index_arrays, zbox_distance
from .measure import AtomicMeasure, cube_mask
from .riesz import NormEstimate

__all__ = [
    "DimensionRow",
    "DimensionTable",
    "GrowthCertificate",
    "GrowthParams",
    "HDSelection",
    "IterationLevel",
    "IterationState",
    "TubeCheck",
    "WitnessReport",
    "cover_dimension_estimate",
    "density",
    "growth_constant",
    "growth_witness",
    "hd_select",
    "hd_tube_check",
    "iterate",
    "select_N",
    "tube_membership",
]

DEFAULT_EXPONENTS = (0.5, 1.0, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0, 4.0)


@dataclass(frozen=True)
class GrowthParams:
    """Scale-gap exponent A, density threshold M, mass-loss exponent s,
    and the iteration depth cap."""

    A: float = 2.0
    M: float = 128.0
    s: float = 0.1
    j_max: int = 3

    def __post_init__(self):
        if not self.A > 1:
            raise ValueError(f"A must exceed 1, got {self.A!r}")
        if not self.M > 100:
            raise ValueError(f"M must exceed 100, got {self.M!r}")
        if not 0 < self.s < 0.5:
            raise ValueError(f"s must lie in (0, 1/2), got {self.s!r}")
        if not isinstance(self.j_max, int) or self.j_max < 0:
            raise ValueError(f"j_max must be a nonnegative integer, got {self.j_max!r}")

    @classmethod
    def default(cls, n: int, A: float = 2.0, M: float = 128.0, j_max: int = 3):
        """Defaults with s tied to the dimension: min(0.1, (D-3) / (2 A^2))."""
        D = 2 * n + 2
        return cls(A=A, M=M, s=min(0.1, (D - 3) / (2.0 * A * A)), j_max=j_max)

    def experimental(self, n: int) -> bool:
        """True when A is below the regime the proofs require (A >= 5D)."""
        return self.A < 5 * (2 * n + 2)


@dataclass(frozen=True)
class HDSelection:
    """One application of the high-density selection below Q0."""

    Q0: CubeId
    N: int
    hd_cubes: tuple
    retained_mass: float
    mass_fraction: float
    packing_sum: float
    theta0: float
    tube_axis_z: np.ndarray


class TubeCheck(NamedTuple):
    all_in_tube: bool
    tube_mass_fraction: float


@dataclass(frozen=True)
class IterationLevel:
    cubes: tuple
    mass: float
    packing_sum: float
    min_sidelength: float


@dataclass(frozen=True)
class IterationState:
    levels: tuple
    params: GrowthParams
    n: int
    product_bounds: tuple
    stop_reason: str | None


@dataclass(frozen=True)
class DimensionRow:
    exponent: float
    sums: tuple
    verdict: str


@dataclass(frozen=True)
class DimensionTable:
    rows: tuple

    @property
    def estimate(self) -> float | None:
        """Infimum tested exponent whose cover sums do not grow."""
        ok = [r.exponent for r in self.rows if r.verdict != "growing"]
        return min(ok) if ok else None


def density(mu: AtomicMeasure, Q: CubeId) -> float:
    """(D-1)-dimensional density mu(Q) / ell(Q)^(D-1)."""
    from .measure import mass_in_cube

    D = 2 * Q.n + 2
    return mass_in_cube(mu, Q) / 2.0 ** (-Q.k * (D - 1))


def growth_constant(mu: AtomicMeasure, centers, radii):
    """Empirical sup of mu(B(x, r)) / r^(2n+1) over the given grids."""
    from .measure import mass_in_ball

    centers = list(centers)
    radii = [float(r) for r in radii]
    if not centers or not radii:
        raise ValueError("centers and radii must be nonempty")
    power = 2 * mu.n + 1
    best = -math.inf
    arg = None
    for c in centers:
        for r in radii:
            val = mass_in_ball(mu, c, r) / r ** power
            if val > best:
                best = val
                arg = (c, r)
    return best, arg


def select_N(theta: float, A: float) -> int:
    """Subdivision depth floor(log2(theta) / A^2); needs theta > 1."""
    if not theta > 1:
        raise ValueError(f"density must exceed 1 to pick a depth, got {theta!r}")
    return int(math.floor(math.log2(theta) / (A * A)))


def _group_masses(mu: AtomicMeasure, k: int, idx: np.ndarray):
    """Cube cells at generation k hit by the atoms idx, with their masses.

    Returns (cells, masses, inverse): cells is an int array (m, 2n+1) of
    (a..., b) rows in lexicographic order, inverse maps atoms to cells.
    """
    az, bt = cube_index_arrays(k, mu.zs[idx], mu.ts[idx])
    rows = np.column_stack([az, bt])
    cells, inverse = np.unique(rows, axis=0, return_inverse=True)
    masses = np.zeros(cells.shape[0])
    np.add.at(masses, inverse, mu.weights[idx])
    return cells, masses, inverse


def _cell_to_cube(k: int, cell) -> CubeId:
    return CubeId(k, tuple(int(v) for v in cell[:-1]), int(cell[-1]))


def _hd_select_on(mu: AtomicMeasure, Q0: CubeId, params: GrowthParams, idx: np.ndarray):
    D = 2 * Q0.n + 2
    mass0 = float(mu.weights[idx].sum())
    theta0 = mass0 / 2.0 ** (-Q0.k * (D - 1))
    if theta0 < params.M:
        raise DensityBelowThreshold(theta0, params.M)
    N = select_N(theta0, params.A)
    if N < 1:
        raise DensityBelowThreshold(theta0, params.M)
    k_child = Q0.k + N
    cells, masses, inverse = _group_masses(mu, k_child, idx)
    ell_pow = 2.0 ** (-k_child * (D - 1))
    thetas = masses / ell_pow
    hd_rows = np.nonzero(thetas > 2.0 * theta0)[0]
    hd_cubes = tuple(_cell_to_cube(k_child, cells[r]) for r in hd_rows)
    retained = float(masses[hd_rows].sum())
    packing = len(hd_rows) * 4.0 ** (-k_child)
    child_idx = {}
    for pos, r in enumerate(hd_rows):
        child_idx[hd_cubes[pos]] = idx[inverse == r]

    # tube axis: the vertical line through the centre of the fullest cell at
    # the pigeonhole depth round(A * N) below Q0
    k_ax = Q0.k + max(N, int(round(params.A * N)))
    ax_cells, ax_masses, _ = _group_masses(mu, k_ax, idx)
    best = int(np.argmax(ax_masses))  # ties: first row = lexicographic least
    axis_cube = _cell_to_cube(k_ax, ax_cells[best])
    zlo, zhi = axis_cube.z_bounds()
    axis_z = 0.5 * (zlo + zhi)

    sel = HDSelection(
        Q0=Q0,
        N=N,
        hd_cubes=hd_cubes,
        retained_mass=retained,
        mass_fraction=retained / mass0 if mass0 > 0 else 0.0,
        packing_sum=packing,
        theta0=theta0,
        tube_axis_z=axis_z,
    )
    return sel, child_idx


def hd_select(mu: AtomicMeasure, Q0: CubeId, params: GrowthParams) -> HDSelection:
    """Depth-N descendants of Q0 whose density more than doubles.

    Enumeration is sparse: atoms are bucketed into generation-(k0+N) cells
    directly, so only cells carrying mass are ever touched.  Raises
    DensityBelowThreshold when the starting density is below M (or when the
    chosen depth degenerates to zero, which cannot happen for M >= 2^(A^2)).
    """
    idx = np.nonzero(cube_mask(mu, Q0))[0]
    sel, _ = _hd_select_on(mu, Q0, params, idx)
    return sel


def tube_membership(p: HPoint, Q0: CubeId, N: int, kappa: float, z_axis=None) -> bool:
    """Is p in the vertical tube T_kappa of Q0 around the given axis?

    T_kappa = {q in Q0 : |z(q) - z_axis| <= kappa 2^-N ell(Q0)}; the axis
    defaults to the t-axis (z = 0), matching the lattice tube queries.
    """
    from .lattice import contains

    if not isinstance(N, int) or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa!r}")
    if not contains(Q0, p):
        return False
    axis = np.zeros(2 * Q0.n) if z_axis is None else np.asarray(z_axis, dtype=float)
    rho = kappa * 2.0 ** (-N) * Q0.ell
    return float(np.linalg.norm(p.z - axis)) <= rho


def hd_tube_check(sel: HDSelection, mu: AtomicMeasure, kappa: float) -> TubeCheck:
    """Do all selected cubes meet the tube around the densest vertical line,
    and how much of mu(Q0) lives in that tube?"""
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa!r}")
    rho = kappa * 2.0 ** (-sel.N) * sel.Q0.ell
    all_in = all(zbox_distance(Q, sel.tube_axis_z) <= rho for Q in sel.hd_cubes)
    idx = np.nonzero(cube_mask(mu, sel.Q0))[0]
    mass0 = float(mu.weights[idx].sum())
    if mass0 == 0.0:
        return TubeCheck(all_in, 0.0)
    dz = mu.zs[idx] - sel.tube_axis_z
    in_tube = np.einsum("ij,ij->i", dz, dz) <= rho * rho
    frac = float(mu.weights[idx][in_tube].sum()) / mass0
    return TubeCheck(all_in, frac)


def iterate(mu: AtomicMeasure, Q0: CubeId, params: GrowthParams) -> IterationState:
    """Repeated high-density selection: level j+1 refines every level-j cube.

    Levels stop early (with the reason recorded) once no cube can be
    subdivided: either densities fell below M, or no descendant doubled its
    parent's density.  Alongside the realized masses the state stores the
    theoretical running lower bounds mu(Q0) * prod_(i<j) (1 - 2^(-i s) M^(-s))
    for comparison.
    """
    D = 2 * Q0.n + 2
    idx0 = np.nonzero(cube_mask(mu, Q0))[0]
    mass0 = float(mu.weights[idx0].sum())
    theta0 = mass0 / 2.0 ** (-Q0.k * (D - 1))
    if theta0 < params.M:
        raise DensityBelowThreshold(theta0, params.M)
    levels = [IterationLevel((Q0,), mass0, 4.0 ** (-Q0.k), Q0.ell)]
    bounds = [mass0]
    frontier = {Q0: idx0}
    stop_reason = None
    bound_product = 1.0
    for j in range(1, params.j_max + 1):
        next_frontier = {}
        n_low = 0
        for Q in sorted(frontier):
            idx = frontier[Q]
            try:
                _, child_idx = _hd_select_on(mu, Q, params, idx)
            except DensityBelowThreshold:
                n_low += 1
                continue
            next_frontier.update(child_idx)
        if not next_frontier:
            if n_low == len(frontier):
                stop_reason = "all cube densities fell below the threshold M"
            else:
                stop_reason = "no descendant exceeded twice its parent's density"
            break
        cubes = tuple(sorted(next_frontier))
        mass = float(sum(mu.weights[next_frontier[Q]].sum() for Q in cubes))
        packing = float(sum(4.0 ** (-Q.k) for Q in cubes))
        min_side = min(Q.ell for Q in cubes)
        levels.append(IterationLevel(cubes, mass, packing, min_side))
        bound_product *= 1.0 - 2.0 ** (-(j - 1) * params.s) * params.M ** (-params.s)
        bounds.append(mass0 * bound_product)
        frontier = next_frontier
    return IterationState(
        levels=tuple(levels),
        params=params,
        n=Q0.n,
        product_bounds=tuple(bounds),
        stop_reason=stop_reason,
    )


def cover_dimension_estimate(state: IterationState, exponents) -> DimensionTable:
    """Cover sums S_j(e) = sum over level-j cubes of (ell/ell(Q0))^e.

    The verdict per exponent compares the last level against the first:
    "decaying" when the sum at least halves, "growing" when it at least
    doubles, "bounded" otherwise.  The infimum non-growing exponent is the
    dimension estimate of the limiting set.
    """
    if len(state.levels) < 2:
        raise ValueError("need at least two levels to estimate a dimension")
    D = 2 * state.n + 2
    exps = [float(e) for e in exponents]
    if not exps:
        raise ValueError("exponents must be nonempty")
    for e in exps:
        if not 0 < e <= D:
            raise ValueError(f"exponents must lie in (0, {D}], got {e!r}")
    k0 = state.levels[0].cubes[0].k
    rows = []
    for e in exps:
        sums = []
        for level in state.levels:
            ks = np.array([Q.k - k0 for Q in level.cubes], dtype=float)
            sums.append(float(np.sum(2.0 ** (-ks * e))))
        first, last = sums[0], sums[-1]
        if last <= 0.5 * first:
            verdict = "decaying"
        elif last >= 2.0 * first:
            verdict = "growing"
        else:
            verdict = "bounded"
        rows.append(DimensionRow(e, tuple(sums), verdict))
    return DimensionTable(tuple(rows))


def _params_dict(params: GrowthParams) -> dict:
    return {"A": params.A, "M": params.M, "s": params.s, "j_max": params.j_max}


@dataclass(frozen=True)
class GrowthCertificate:
    """No scanned cube reached the density threshold: the measured growth
    constant (max cube density over the scan) is the empirical bound."""

    value: float
    argmax_cube: CubeId | None
    scan_generations: tuple
    params: GrowthParams
    c2_threshold: float
    exceeds_threshold: bool
    norm_profile: tuple
    verdict: str = "certificate"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "value": self.value,
            "argmax_cube": self.argmax_cube.to_json() if self.argmax_cube else None,
            "scan_generations": list(self.scan_generations),
            "params": _params_dict(self.params),
            "c2_threshold": self.c2_threshold,
            "exceeds_threshold": self.exceeds_threshold,
            "norm_profile": [
                {"delta": e.delta, "value": e.value, "iterations": e.iterations, "residual": e.residual}
                for e in self.norm_profile
            ],
        }


@dataclass(frozen=True)
class WitnessReport:
    """A qualifying cube existed: the iteration's positive-mass, low-dimension
    evidence, with the operator-norm profile for context."""

    start_cube: CubeId
    theta0: float
    params: GrowthParams
    experimental_constants: bool
    state: IterationState
    dimension: DimensionTable
    norm_profile: tuple
    verdict: str = "witness"

    @property
    def mass_fraction(self) -> float:
        return self.state.levels[-1].mass / self.state.levels[0].mass

    @property
    def dimension_estimate(self) -> float | None:
        return self.dimension.estimate

    def to_dict(self) -> dict:
        st = self.state
        return {
            "verdict": self.verdict,
            "start_cube": self.start_cube.to_json(),
            "theta0": self.theta0,
            "params": _params_dict(self.params),
            "experimental_constants": self.experimental_constants,
            "levels": [
                {
                    "j": j,
                    "cube_count": len(level.cubes),
                    "mass": level.mass,
                    "packing_sum": level.packing_sum,
                    "min_sidelength": level.min_sidelength,
                    "mass_bound": st.product_bounds[j],
                }
                for j, level in enumerate(st.levels)
            ],
            "stop_reason": st.stop_reason,
            "mass_fraction": self.mass_fraction,
            "dimension_estimate": self.dimension_estimate,
            "dimension_table": [
                {"exponent": r.exponent, "sums": list(r.sums), "verdict": r.verdict}
                for r in self.dimension.rows
            ],
            "norm_profile": [
                {"delta": e.delta, "value": e.value, "iterations": e.iterations, "residual": e.residual}
                for e in self.norm_profile
            ],
        }


def default_scan_depth(atom_count: int, D: int) -> int:
    """Depth at which cubes resolve single atoms: scanning deeper than the
    discretization scale would read spurious infinite densities off isolated
    atoms, so the density scan stops around generation log2(count)/D."""
    return max(1, int(math.floor(math.log2(max(atom_count, 2)) / D)))


def growth_witness(
    mu: AtomicMeasure,
    domain: CubeId,
    params: GrowthParams,
    norm_profile,
    c2_threshold: float,
    scan_depth: int | None = None,
    exponents=DEFAULT_EXPONENTS,
):
    """Executable contrapositive of the growth theorem on a domain cube.

    Scans cube densities generation by generation below `domain`.  If no
    cube reaches M, returns a GrowthCertificate carrying the measured
    growth constant (flagged when it exceeds c2_threshold).  Otherwise runs
    the iteration from the densest qualifying cube and returns a
    WitnessReport with the retained-mass levels and the cover-sum dimension
    table.
    """
    if len(mu) == 0 or mu.total_mass == 0.0:
        raise ValueError("growth witness needs a nonempty measure")
    if not c2_threshold > 0:
        raise ValueError(f"c2_threshold must be positive, got {c2_threshold!r}")
    D = 2 * domain.n + 2
    idx_dom = np.nonzero(cube_mask(mu, domain))[0]
    norm_profile = tuple(norm_profile)
    if scan_depth is None:
        scan_depth = default_scan_depth(len(idx_dom), D)
    best_theta = 0.0
    best_cube = None
    qualifying = []
    for dk in range(scan_depth + 1):
        if idx_dom.size == 0:
            break
        k = domain.k + dk
        cells, masses, _ = _group_masses(mu, k, idx_dom)
        thetas = masses / 2.0 ** (-k * (D - 1))
        for r in range(cells.shape[0]):
            th = float(thetas[r])
            cube = _cell_to_cube(k, cells[r])
            if th > best_theta:
                best_theta = th
                best_cube = cube
            if th >= params.M:
                qualifying.append((th, cube))
    if not qualifying:
        return GrowthCertificate(
            value=best_theta,
            argmax_cube=best_cube,
            scan_generations=(domain.k, domain.k + scan_depth),
            params=params,
            c2_threshold=float(c2_threshold),
            exceeds_threshold=best_theta > c2_threshold,
            norm_profile=norm_profile,
        )
    qualifying.sort(key=lambda tc: (-tc[0], tc[1]))  # densest first, ties by cube id
    start = qualifying[0][1]
    state = iterate(mu, start, params)
    dim = cover_dimension_estimate(state, exponents)
    theta_start = density(mu, start)
    return WitnessReport(
        start_cube=start,
        theta0=theta_start,
        params=params,
        experimental_constants=params.experimental(domain.n),
        state=state,
        dimension=dim,
        norm_profile=norm_profile,
    )
