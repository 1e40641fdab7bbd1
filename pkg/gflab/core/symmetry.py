# core/symmetry.py
"""
Symmetry analysis for the unitary groups e^{is𝒫} generated by projection fields.

The invariance of range 𝒫 under the heat semigroup is checked three ways:
(a) leakage of evolved states, (b) a(𝒫ψ, ψ − 𝒫ψ) = 0, (c) a(e^{is𝒫}ψ) = a(ψ).
Non-constant fields produce a gauge field (e^{is}−1)e^{−isP}(D_kP), which
enters the covariant derivative and the interaction Lagrangian.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from gflab.core.calculus import (
    exp_projection_field,
    grad_offdiagonal_decompose,
    is_ideal_projection,
    projection_gradient,
)
from gflab.core.errors import AnnihilatedStateError, GridMismatchError, TrajectoryError
from gflab.core.evolution import (
    SUPPORT_THRESHOLD,
    apply_exp_group,
    apply_operator_field,
    apply_projection_field,
    evolve_heat,
    evolve_schrodinger,
    heat_positivity,
    leakage,
    support_mask,
)
from gflab.core.fiber import Projection, coordinate_projection, operator_norm
from gflab.core.grid import Field, GridSpec, ProjectionField, Trajectory, difference, form_a, form_a_sesq, shift

logger = logging.getLogger(__name__)

DEFAULT_S_SAMPLES = (math.pi / 4, math.pi / 2, math.pi)
DEFAULT_LEAKAGE_TIMES = (0.01, 0.1, 1.0)
GAUGE_TOL = 1e-10
CONSTANCY_EPS = 1e-8


class Verdict(Enum):
    SYMMETRIC = "symmetric"
    NOT_SYMMETRIC = "not symmetric"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Thresholds:
    """Residuals at or below `passing` are symmetric, at or above `failing` are not."""
    passing: float = 1e-8
    failing: float = 1e-3

    def classify(self, residual: float) -> Verdict:
        if residual <= self.passing:
            return Verdict.SYMMETRIC
        if residual >= self.failing:
            return Verdict.NOT_SYMMETRIC
        return Verdict.INCONCLUSIVE


def combine(verdicts: Sequence[Verdict]) -> Verdict:
    if any(v is Verdict.NOT_SYMMETRIC for v in verdicts):
        return Verdict.NOT_SYMMETRIC
    if all(v is Verdict.SYMMETRIC for v in verdicts):
        return Verdict.SYMMETRIC
    return Verdict.INCONCLUSIVE


# ── Test-field ensemble ───────────────────────────────────────────────────────

def fourier_mode_fields(grid: GridSpec, d: int) -> List[Field]:
    """e^{±2πi x_k} e_j for every axis k and fiber direction j (2·d·n fields)."""
    coords = grid.coordinates()
    fields = []
    for k in range(grid.n):
        for j in range(d):
            for sign in (1, -1):
                values = np.zeros(grid.shape + (d,), dtype=complex)
                values[..., j] = np.exp(sign * 2j * np.pi * coords[k])
                fields.append(Field(grid, values))
    return fields


def criterion_ensemble(p: ProjectionField, trials: int, rng: np.random.Generator) -> List[Field]:
    """
    Low Fourier modes plus `trials` Gaussian fields, each also taken with its
    quarter turn e^{i(π/2)𝒫}ψ, which rotates a(𝒫ψ, ψ−𝒫ψ) by i.
    """
    base = fourier_mode_fields(p.grid, p.d) + [Field.random(p.grid, p.d, rng) for _ in range(trials)]
    return base + [apply_exp_group(p, math.pi / 2, psi) for psi in base]


def criterion_b_residual(p: ProjectionField, psi: Field) -> float:
    projected = apply_projection_field(p, psi)
    return abs(form_a_sesq(projected, psi - projected)) / (1.0 + form_a(psi))


def criterion_c_residual(p: ProjectionField, s: float, psi: Field) -> float:
    energy = form_a(psi)
    return abs(form_a(apply_exp_group(p, s, psi)) - energy) / (1.0 + energy)


def regularity(p: ProjectionField) -> List[float]:
    """Per-axis sup ‖D_kP‖, reported in place of an H¹ membership claim."""
    return [float(np.max(operator_norm(dp))) for dp in projection_gradient(p)]


@dataclass
class SymmetryReport:
    criterion_b_residual: float
    criterion_c_residuals: Dict[float, float]
    max_leakage: float
    criterion_b_verdict: Verdict
    criterion_c_verdict: Verdict
    leakage_verdict: Verdict
    verdict: Verdict
    thresholds: Thresholds
    leakage_times: Tuple[float, ...]
    regularity: List[float] = field(default_factory=list)

    @property
    def verdicts_agree(self) -> bool:
        return self.criterion_b_verdict == self.criterion_c_verdict == self.leakage_verdict

    @property
    def symmetric(self) -> bool:
        return self.verdict is Verdict.SYMMETRIC

    def to_dict(self) -> Dict:
        return {
            "criterion_b_residual": self.criterion_b_residual,
            "criterion_c_residuals": [
                {"s": s, "residual": r} for s, r in sorted(self.criterion_c_residuals.items())
            ],
            "max_leakage": self.max_leakage,
            "leakage_times": list(self.leakage_times),
            "criterion_b_verdict": self.criterion_b_verdict.value,
            "criterion_c_verdict": self.criterion_c_verdict.value,
            "leakage_verdict": self.leakage_verdict.value,
            "verdict": self.verdict.value,
            "verdicts_agree": self.verdicts_agree,
            "tolerances": {"pass": self.thresholds.passing, "fail": self.thresholds.failing},
            "regularity": self.regularity,
        }


def max_leakage(p: ProjectionField, ensemble: Sequence[Field], times: Sequence[float]) -> float:
    worst = 0.0
    for psi in ensemble:
        try:
            worst = max(worst, max(leakage(p, psi, times)))
        except AnnihilatedStateError:
            continue
    return worst


def check_invariance_criterion(
    p: ProjectionField,
    trials: int = 8,
    rng: Optional[np.random.Generator] = None,
    s_samples: Sequence[float] = DEFAULT_S_SAMPLES,
    times: Sequence[float] = DEFAULT_LEAKAGE_TIMES,
    thresholds: Thresholds = Thresholds(),
) -> SymmetryReport:
    """Evaluate the three equivalent invariance conditions on a shared test ensemble."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    s_values = sorted(set(float(s) for s in s_samples) | {math.pi})
    ensemble = criterion_ensemble(p, trials, rng)

    residual_b = max(criterion_b_residual(p, psi) for psi in ensemble)
    residuals_c = {s: max(criterion_c_residual(p, s, psi) for psi in ensemble) for s in s_values}
    leak = max_leakage(p, ensemble, times)

    verdict_b = thresholds.classify(residual_b)
    verdict_c = thresholds.classify(residuals_c[math.pi])
    verdict_a = thresholds.classify(leak)
    overall = combine([verdict_b, verdict_a] + [thresholds.classify(r) for r in residuals_c.values()])

    report = SymmetryReport(
        residual_b, residuals_c, leak, verdict_b, verdict_c, verdict_a, overall,
        thresholds, tuple(times), regularity(p),
    )
    if not report.verdicts_agree:
        logger.warning(
            f"invariance conditions disagree: (a) {verdict_a.value}, (b) {verdict_b.value}, (c) {verdict_c.value}"
        )
    if overall is Verdict.INCONCLUSIVE:
        logger.warning("invariance verdict inconclusive — refine h")
    return report


@dataclass(frozen=True)
class GlobalSymmetryResult:
    symmetric: bool
    residual: float

    def __bool__(self):
        return self.symmetric


def check_global_symmetry(
    p: ProjectionField,
    trials: int = 8,
    rng: Optional[np.random.Generator] = None,
    s_samples: Sequence[float] = DEFAULT_S_SAMPLES,
    tol: float = Thresholds().passing,
) -> GlobalSymmetryResult:
    """Is O = e^{is𝒫} a global symmetry, a(Oψ) = a(ψ), over the s samples and the ensemble?"""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    ensemble = criterion_ensemble(p, trials, rng)
    residual = max(criterion_c_residual(p, s, psi) for s in s_samples for psi in ensemble)
    return GlobalSymmetryResult(residual <= tol, residual)


def form_group_expansion(p: ProjectionField, s: float, psi: Field) -> float:
    """|e^{is}−1|² a(𝒫ψ,𝒫ψ) + 2 Re((e^{is}−1) a(𝒫ψ,ψ)) + a(ψ,ψ), which equals a(e^{is𝒫}ψ)."""
    c = np.exp(1j * s) - 1.0
    projected = apply_projection_field(p, psi)
    return float(abs(c) ** 2 * form_a(projected) + 2.0 * (c * form_a_sesq(projected, psi)).real + form_a(psi))


# ── Gauge field and covariant derivative ─────────────────────────────────────

@dataclass(frozen=True, eq=False)
class GaugeField:
    """A_{s,k}(x) = (e^{is}−1)·e^{−isP_x}·(D_kP)(x), one operator field per axis."""
    grid: GridSpec
    s: float
    components: Tuple[np.ndarray, ...]

    def cell_norms(self) -> np.ndarray:
        """Per cell, the largest ‖A_{s,k}(x)‖ over axes."""
        return np.max(np.stack([operator_norm(a) for a in self.components]), axis=0)

    def sup_norm(self) -> float:
        return float(np.max(self.cell_norms()))

    def support(self, tol: float = GAUGE_TOL) -> List[Tuple[int, ...]]:
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self.cell_norms() > tol)]


def gauge_field(p: ProjectionField, s: float) -> GaugeField:
    if s == 0:
        zeros = np.zeros(p.grid.shape + (p.d, p.d), dtype=complex)
        return GaugeField(p.grid, s, tuple(zeros for _ in range(p.grid.n)))
    factor = np.exp(1j * s) - 1.0
    twist = exp_projection_field(p.values, -1j * s)
    return GaugeField(p.grid, s, tuple(factor * twist @ dp for dp in projection_gradient(p)))


def gauge_field_alternative(p: ProjectionField, s: float) -> GaugeField:
    """The same multiplier written as (e^{isP⊥} − e^{−isP})(D_kP)."""
    complement = np.eye(p.d) - p.values
    difference_op = exp_projection_field(complement, 1j * s) - exp_projection_field(p.values, -1j * s)
    return GaugeField(p.grid, s, tuple(difference_op @ dp for dp in projection_gradient(p)))


def gauge_field_split(p: ProjectionField, s: float) -> GaugeField:
    """(1−e^{−is}) P(D_kP)P⊥ + (e^{is}−1) P⊥(D_kP)P: the gauge field with diagonal blocks dropped."""
    components = []
    for split in grad_offdiagonal_decompose(p):
        components.append((1.0 - np.exp(-1j * s)) * split.upper + (np.exp(1j * s) - 1.0) * split.lower)
    return GaugeField(p.grid, s, tuple(components))


def split_form_residuals(p: ProjectionField, s: float) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Per axis, (‖A − A_split‖, |e^{is}−1|·diagonal-block residual) cellwise; the
    first never exceeds the second.
    """
    full = gauge_field(p, s)
    split = gauge_field_split(p, s)
    scale = abs(np.exp(1j * s) - 1.0)
    out = []
    for a, b, blocks in zip(full.components, split.components, grad_offdiagonal_decompose(p)):
        out.append((operator_norm(a - b), scale * blocks.diagonal_residual))
    return out


def _check_grid(p: ProjectionField, f: Field):
    if p.grid != f.grid or p.d != f.d:
        raise GridMismatchError(f"grid mismatch: projection field on {p.grid} (d={p.d}), field on {f.grid} (d={f.d})")


def covariant_derivative(p: ProjectionField, s: float, f: Field) -> List[Field]:
    """∇_s f = ∇f + A_s f, per axis."""
    _check_grid(p, f)
    gauge = gauge_field(p, s)
    return [
        f.with_values(difference(f.values, f.grid, k) + apply_operator_field(a, f).values)
        for k, a in enumerate(gauge.components)
    ]


def form_a_s(p: ProjectionField, s: float, f: Field) -> float:
    """a_s(f) = hⁿ Σ_x Σ_k ‖(D_kf)(x) + A_{s,k}(x) f(x)‖²."""
    total = sum(float(np.sum(np.abs(component.values) ** 2)) for component in covariant_derivative(p, s, f))
    return f.grid.cell_volume * total


def form_a_s_exact(p: ProjectionField, s: float, f: Field) -> float:
    """
    Discrete-Leibniz variant: D_k(e^{is𝒫}f)(x) = e^{isP(x+h e_k)}[D_kf(x) + (e^{is}−1)e^{−isP(x+h e_k)}(D_kP)(x) f(x)],
    so this equals a(e^{is𝒫}f) up to rounding.
    """
    _check_grid(p, f)
    factor = np.exp(1j * s) - 1.0
    total = 0.0
    for k, dp in enumerate(projection_gradient(p)):
        twist = exp_projection_field(shift(p.values, k), -1j * s)
        gauge = factor * twist @ dp
        covariant = difference(f.values, f.grid, k) + np.einsum("...ij,...j->...i", gauge, f.values)
        total += float(np.sum(np.abs(covariant) ** 2))
    return f.grid.cell_volume * total


def interaction_lagrangian(p: ProjectionField, s: float, traj: Trajectory) -> float:
    """𝓛_s(φ) = Σ_j dt_j · hⁿ Σ_x Σ_k ‖A_{s,k}(x) φ(t_j, x)‖², same time quadrature as the Lagrangian."""
    if len(traj) < 2:
        raise TrajectoryError("interaction lagrangian needs at least 2 time samples")
    gauge = gauge_field(p, s)
    total = 0.0
    for j in range(len(traj) - 1):
        phi = traj.states[j]
        _check_grid(p, phi)
        dt = traj.times[j + 1] - traj.times[j]
        energy = sum(float(np.sum(np.abs(apply_operator_field(a, phi).values) ** 2)) for a in gauge.components)
        total += dt * phi.grid.cell_volume * energy
    return total


# ── Local constancy ───────────────────────────────────────────────────────────

class PartitionLabel(Enum):
    ZERO = "zero"
    IDENTITY = "identity"
    COORDINATE_IDEAL = "coordinate-ideal"
    GENERAL = "general"


def label_projection(q: Projection, rng: Optional[np.random.Generator] = None) -> PartitionLabel:
    if q.rank == 0:
        return PartitionLabel.ZERO
    if q.rank == q.dim:
        return PartitionLabel.IDENTITY
    if is_ideal_projection(q, rng=rng).is_ideal:
        return PartitionLabel.COORDINATE_IDEAL
    return PartitionLabel.GENERAL


def adjacent_distances(p: ProjectionField) -> List[np.ndarray]:
    """Per axis, ‖P(x + h e_k) − P(x)‖ at every cell x."""
    return [operator_norm(shift(p.values, k) - p.values) for k in range(p.grid.n)]


@dataclass(frozen=True, eq=False)
class LocalConstancyPartition:
    component_ids: np.ndarray            # int per cell
    projections: Tuple[Projection, ...]  # first cell's projection per component
    labels: Tuple[PartitionLabel, ...]
    residual: float                      # max adjacent distance inside a component
    eps: float

    @property
    def num_components(self) -> int:
        return len(self.projections)

    def component_sizes(self) -> List[int]:
        return np.bincount(self.component_ids.reshape(-1), minlength=self.num_components).tolist()

    def to_dict(self) -> Dict:
        return {
            "num_components": self.num_components,
            "component_sizes": self.component_sizes(),
            "labels": [label.value for label in self.labels],
            "residual": self.residual,
            "eps": self.eps,
        }


def detect_locally_constant(
    p: ProjectionField,
    eps: float = CONSTANCY_EPS,
    rng: Optional[np.random.Generator] = None,
) -> LocalConstancyPartition:
    """Connected components of the grid graph whose edges join adjacent cells with ‖P_x − P_y‖ ≤ eps."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    grid = p.grid
    n_cells = grid.num_cells
    flat = np.arange(n_cells).reshape(grid.shape)
    distances = adjacent_distances(p)

    sources, targets = [], []
    for k, dist in enumerate(distances):
        close = dist <= eps
        sources.append(flat[close])
        targets.append(shift(flat, k)[close])
    sources = np.concatenate(sources)
    targets = np.concatenate(targets)
    graph = coo_matrix((np.ones(sources.size), (sources, targets)), shape=(n_cells, n_cells)).tocsr()
    n_components, labels = connected_components(graph, directed=False)
    component_ids = labels.reshape(grid.shape)

    residual = 0.0
    for k, dist in enumerate(distances):
        same = component_ids == shift(component_ids, k)
        if np.any(same):
            residual = max(residual, float(np.max(dist[same])))

    flat_values = p.values.reshape(-1, p.d, p.d)
    first_cells = [int(np.flatnonzero(labels == c)[0]) for c in range(n_components)]
    projections = tuple(Projection(flat_values[i], tol=p.tol) for i in first_cells)
    partition_labels = tuple(label_projection(q, rng) for q in projections)
    logger.debug(f"local constancy: {n_components} components at eps={eps:.1e}")
    return LocalConstancyPartition(component_ids, projections, partition_labels, residual, eps)


@dataclass
class NecessaryConditionReport:
    gauge_sup_norm: float
    gauge_support: List[Tuple[int, ...]]
    criterion_verdict: Verdict
    partition: LocalConstancyPartition
    max_adjacent_distance: float
    gauge_vanishes: bool
    single_component: bool
    constant: bool

    @property
    def consistent(self) -> bool:
        return self.gauge_vanishes == self.single_component == self.constant

    def to_dict(self) -> Dict:
        return {
            "gauge_sup_norm": self.gauge_sup_norm,
            "gauge_support_size": len(self.gauge_support),
            "criterion_verdict": self.criterion_verdict.value,
            "partition": self.partition.to_dict(),
            "max_adjacent_distance": self.max_adjacent_distance,
            "gauge_vanishes": self.gauge_vanishes,
            "single_component": self.single_component,
            "constant": self.constant,
            "consistent": self.consistent,
        }


def necessary_condition_experiment(
    p: ProjectionField,
    trials: int = 8,
    rng: Optional[np.random.Generator] = None,
    tol: float = GAUGE_TOL,
    eps: float = CONSTANCY_EPS,
    thresholds: Thresholds = Thresholds(),
) -> NecessaryConditionReport:
    """A symmetric system needs a locally constant field: compare the gauge field at s=π with the partition."""
    rng = rng if rng is not None else np.random.default_rng(0)
    gauge = gauge_field(p, math.pi)
    criterion = check_invariance_criterion(p, trials, rng, thresholds=thresholds)
    partition = detect_locally_constant(p, eps, rng)
    max_distance = max(float(np.max(dist)) for dist in adjacent_distances(p))

    report = NecessaryConditionReport(
        gauge_sup_norm=gauge.sup_norm(),
        gauge_support=gauge.support(tol),
        criterion_verdict=criterion.verdict,
        partition=partition,
        max_adjacent_distance=max_distance,
        gauge_vanishes=gauge.sup_norm() <= tol,
        single_component=partition.num_components == 1,
        constant=max_distance <= eps,
    )
    if not report.consistent:
        logger.error(
            f"necessary condition inconsistent: gauge {report.gauge_sup_norm:.3e}, "
            f"{partition.num_components} components, max adjacent distance {max_distance:.3e}"
        )
    return report


# ── Irreducibility ────────────────────────────────────────────────────────────

@dataclass
class IrreducibilityReport:
    d: int
    irreducible: bool
    subsets_checked: int
    exhaustive: bool
    witnesses: List[Tuple[int, ...]] = field(default_factory=list)   # 1-based fiber coordinates
    worst_witness_leakage: float = 0.0
    min_outside_mass: Optional[float] = None
    positivity_min: Optional[float] = None
    support_complete: Optional[bool] = None
    schrodinger_leakage: Optional[float] = None   # worst witness leakage (d ≥ 2) or least escaped mass (d = 1)

    def to_dict(self) -> Dict:
        return {
            "d": self.d,
            "irreducible": self.irreducible,
            "verdict": "irreducible" if self.irreducible else "not irreducible",
            "subsets_checked": self.subsets_checked,
            "exhaustive": self.exhaustive,
            "witnesses": [list(w) for w in self.witnesses],
            "worst_witness_leakage": self.worst_witness_leakage,
            "min_outside_mass": self.min_outside_mass,
            "positivity_min": self.positivity_min,
            "support_complete": self.support_complete,
            "schrodinger_leakage": self.schrodinger_leakage,
        }


def heat_kernel_matrix(grid: GridSpec, t: float) -> np.ndarray:
    """K[x, y] = (e^{tΔ} δ_y)(x) for scalar fields, flat cell indices."""
    n_cells = grid.num_cells
    deltas = np.eye(n_cells).reshape(grid.shape + (n_cells,))
    evolved = evolve_heat(Field(grid, deltas), t)
    return evolved.values.real.reshape(n_cells, n_cells)


def _cell_subsets(n_cells: int, exhaustive_limit: int, random_subsets: int, rng: np.random.Generator):
    if n_cells <= exhaustive_limit:
        masks = (np.arange(1, 2**n_cells - 1)[:, None] >> np.arange(n_cells)) & 1
        return masks.astype(bool), True
    masks = list(np.eye(n_cells, dtype=bool))
    while len(masks) < n_cells + random_subsets:
        mask = rng.random(n_cells) < 0.5
        if mask.any() and not mask.all():
            masks.append(mask)
    return np.array(masks), False


def irreducibility_scan(
    grid: GridSpec,
    d: int,
    t: float,
    rng: Optional[np.random.Generator] = None,
    trials: int = 4,
    exhaustive_limit: int = 12,
    random_subsets: int = 100,
    mass_threshold: float = SUPPORT_THRESHOLD,
    leakage_tol: float = GAUGE_TOL,
) -> IrreducibilityReport:
    """
    Search for closed ideals left invariant by the heat semigroup.

    d ≥ 2: every constant coordinate-ideal field 𝒫_S is tested for leakage;
    any invariant one is a witness of reducibility. d = 1: the ideals are
    L²(ω) for cell subsets ω, and each must lose mass outside ω after time t.
    The same ideals are run through the Schrödinger group as a second row.
    """
    if d < 1:
        raise ValueError("fiber dimension must be at least 1")
    if not t > 0:
        raise ValueError("scan time must be positive")
    rng = rng if rng is not None else np.random.default_rng(0)

    if d >= 2:
        ensemble = [Field.random(grid, d, rng) for _ in range(trials)]
        witnesses, worst, schrodinger_worst, checked = [], 0.0, 0.0, 0
        for size in range(1, d):
            for subset in itertools.combinations(range(d), size):
                checked += 1
                p = ProjectionField.constant(grid, coordinate_projection(d, subset))
                leak = max(leakage(p, psi, [t])[0] for psi in ensemble)
                if leak <= leakage_tol:
                    witnesses.append(tuple(j + 1 for j in subset))
                    worst = max(worst, leak)
                    schrodinger = max(leakage(p, psi, [t], evolve_schrodinger)[0] for psi in ensemble)
                    schrodinger_worst = max(schrodinger_worst, schrodinger)
        evolved = evolve_heat(ensemble[0], t)
        support = bool(np.all(support_mask(evolved)))
        logger.info(f"irreducibility d={d}: {len(witnesses)} invariant coordinate ideals of {checked}")
        return IrreducibilityReport(
            d, not witnesses, checked, True, witnesses, worst, support_complete=support,
            schrodinger_leakage=schrodinger_worst,
        )

    kernel = heat_kernel_matrix(grid, t)
    masks, exhaustive = _cell_subsets(grid.num_cells, exhaustive_limit, random_subsets, rng)
    indicators = masks.astype(float)
    evolved = indicators @ kernel.T
    outside = np.where(masks, 0.0, evolved)
    outside_mass = np.sqrt(np.sum(outside**2, axis=1) / np.sum(indicators, axis=1))
    min_mass = float(outside_mass.min())

    columns = Field(grid, indicators.T.reshape(grid.shape + (len(masks),)))
    unitary = evolve_schrodinger(columns, t).values.reshape(grid.num_cells, len(masks)).T
    escaped = np.where(masks, 0.0, np.abs(unitary))
    schrodinger_mass = float(np.min(np.sqrt(np.sum(escaped**2, axis=1) / np.sum(indicators, axis=1))))

    delta = np.zeros(grid.shape + (1,))
    delta[(0,) * grid.n] = 1.0
    positivity = heat_positivity(Field(grid, delta), t)
    logger.info(f"irreducibility d=1: min outside mass {min_mass:.3e} over {len(masks)} subsets")
    return IrreducibilityReport(
        d, bool(min_mass > mass_threshold), len(masks), exhaustive,
        min_outside_mass=min_mass, positivity_min=positivity, support_complete=bool(positivity > 0),
        schrodinger_leakage=schrodinger_mass,
    )
