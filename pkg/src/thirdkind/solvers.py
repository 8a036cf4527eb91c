"""Forward model, reduced solves, and end-to-end equivalence checks.

The input problem is H(x) phi(x) - lambda (K phi)(x) = psi(x) on the grid.
Reduction produces the lambda-independent pair of coefficient matrices
A0 (from H - alpha) and A (from K); the reduced equation reads
alpha f + (A0 - lambda A) f = g with f, g the forward coefficients of
phi, psi. With alpha = 0, multiplying by the positive smooth m turns it
into the first-kind system M (A0 - lambda A) f = M g, solved here by a
truncated-spectral pseudoinverse (the reduction itself is exact; the
first-kind solve is ill-posed and needs a declared policy).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AlphaNotZeroError, DegenerateSystemError, NearSingularError
from .hermite import Multiplier, SmoothBasis, multiplier_matrix
from .kernels import (
    BilinearKernel,
    absolute_tail_sup,
    adjoint_column_quarter_maxima,
    carleman_row_norms,
    coefficient_form_gap,
    hs_norm,
    probe_grid,
    scale_by_multiplier,
    synthesize,
)
from .measure import (
    GridFunction,
    GridKernel,
    IntegralOperator,
    MultiplicationOperator,
)
from .rademacher import KorotkovSequence
from .reduction import CoefficientMatrix, UnitarySurrogate, matrix_elements

CONDITION_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class ThirdKindProblem:
    """Problem data (H, K, lambda, psi) over one grid."""

    coefficient: GridFunction
    kernel: GridKernel
    lam: complex
    rhs: GridFunction | None = None

    def __post_init__(self):
        if self.kernel.space != self.coefficient.space:
            raise ValueError("coefficient and kernel live on different grids")
        if self.rhs is not None and self.rhs.space != self.coefficient.space:
            raise ValueError("right-hand side lives on a different grid")

    @property
    def space(self):
        return self.coefficient.space

    @classmethod
    def manufactured(
        cls,
        coefficient: GridFunction,
        kernel: GridKernel,
        lam: complex,
        solution: GridFunction,
    ) -> "ThirdKindProblem":
        """Build a consistent problem by applying the forward operator to a
        chosen solution (sidesteps solvability of arbitrary right sides)."""
        stub = cls(coefficient, kernel, lam)
        return cls(coefficient, kernel, lam, forward_third_kind(stub, solution))


def forward_third_kind(p: ThirdKindProblem, phi: GridFunction) -> GridFunction:
    """psi = H phi - lambda K phi, evaluated cellwise with midpoint quadrature."""
    if phi.space != p.space:
        raise ValueError("function lives on a different grid")
    k_phi = p.kernel.apply(phi)
    return GridFunction(p.space, p.coefficient.values * phi.values - p.lam * k_phi.values)


@dataclass(frozen=True, eq=False)
class KernelPencil:
    """Reduced equation data: shift alpha and matrices A0, A (lambda-free)."""

    alpha: complex
    a0: CoefficientMatrix
    a: CoefficientMatrix
    basis: SmoothBasis

    @property
    def size(self) -> int:
        return self.a0.shape[0]

    def system_matrix(self, lam: complex) -> np.ndarray:
        """alpha I + A0 - lambda A; affine in lambda by construction."""
        return (self.alpha * np.eye(self.size) + self.a0) - lam * self.a

    def kernel_t0(self) -> BilinearKernel:
        return synthesize(self.a0, self.basis)

    def kernel_t(self) -> BilinearKernel:
        return synthesize(self.a, self.basis)

    def pencil_kernel(self, lam: complex) -> BilinearKernel:
        return synthesize(self.a0 - lam * self.a, self.basis)


def reduce_problem(
    p: ThirdKindProblem,
    alpha: complex,
    seq: KorotkovSequence,
    U: UnitarySurrogate,
) -> tuple[KernelPencil, np.ndarray]:
    """Transform the grid problem into the reduced coefficient form.

    A0 and A are the matrices of H - alpha and K over the paired basis; g is
    the forward image of psi. At full truncation the identity
    alpha f + (A0 - lambda A) f = g holds to rounding whenever psi came from
    the forward model at phi and f is the forward image of phi.
    """
    if p.rhs is None:
        raise ValueError("problem has no right-hand side; manufacture one first")
    if p.space != U.space or seq.space != U.space:
        raise ValueError("problem, sequence, and surrogate must share one grid")
    b_basis = U.b_functions
    shifted = GridFunction(p.space, p.coefficient.values - alpha)
    a0 = matrix_elements(MultiplicationOperator(shifted), b_basis)
    a = matrix_elements(IntegralOperator(p.kernel), b_basis)
    g = U.forward(p.rhs)
    return KernelPencil(alpha=complex(alpha), a0=a0, a=a, basis=U.basis), g


@dataclass(frozen=True)
class SecondKindSolution:
    coefficients: np.ndarray
    residual: float
    condition: float


def solve_second_kind(
    pencil: KernelPencil, lam: complex, g: np.ndarray
) -> SecondKindSolution:
    """Dense solve of (alpha I + A0 - lambda A) c = g with a condition gate.

    Raises NearSingularError when the condition estimate exceeds 1e12,
    signalling lambda near a characteristic value.
    """
    if pencil.alpha == 0:
        raise ValueError("alpha must be nonzero for a genuine second-kind solve")
    g = np.asarray(g, dtype=complex)
    if g.shape != (pencil.size,):
        raise ValueError(f"expected {pencil.size} coefficients, got {g.shape}")
    system = pencil.system_matrix(lam)
    condition = float(np.linalg.cond(system))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise NearSingularError(condition)
    c = np.linalg.solve(system, g)
    scale = float(np.linalg.norm(g))
    residual = float(np.linalg.norm(system @ c - g)) / (scale if scale else 1.0)
    return SecondKindSolution(coefficients=c, residual=residual, condition=condition)


@dataclass(frozen=True, eq=False)
class FirstKindProblem:
    """First-kind data: pencil with alpha = 0, multiplier matrix M, w = M g."""

    pencil: KernelPencil
    multiplier: Multiplier
    m_matrix: np.ndarray
    w: np.ndarray

    def gamma0(self) -> BilinearKernel:
        return scale_by_multiplier(self.pencil.kernel_t0(), self.multiplier, self.m_matrix)

    def gamma(self) -> BilinearKernel:
        return scale_by_multiplier(self.pencil.kernel_t(), self.multiplier, self.m_matrix)

    def gamma_pencil(self, lam: complex) -> BilinearKernel:
        return scale_by_multiplier(
            self.pencil.pencil_kernel(lam), self.multiplier, self.m_matrix
        )

    def system_matrix(self, lam: complex) -> np.ndarray:
        return self.m_matrix @ (self.pencil.a0 - lam * self.pencil.a)


def make_first_kind(
    pencil: KernelPencil,
    m: Multiplier,
    g: np.ndarray,
    quad_nodes: int | None = None,
) -> FirstKindProblem:
    """Multiply the reduced equation through by the positive multiplier m.

    Requires alpha exactly 0 (otherwise the equation keeps its second-kind
    term and AlphaNotZeroError is raised). Since m is positive everywhere,
    the scaling is invertible on evaluations and preserves solution sets.
    """
    if pencil.alpha != 0:
        raise AlphaNotZeroError(f"alpha = {pencil.alpha} is not 0")
    m_mat = multiplier_matrix(m, pencil.basis, quad_nodes)
    g = np.asarray(g, dtype=complex)
    if g.shape != (pencil.size,):
        raise ValueError(f"expected {pencil.size} coefficients, got {g.shape}")
    return FirstKindProblem(pencil=pencil, multiplier=m, m_matrix=m_mat, w=m_mat @ g)


@dataclass(frozen=True)
class FirstKindSolution:
    coefficients: np.ndarray
    discarded_energy: float
    kept: int


def solve_first_kind(
    fp: FirstKindProblem, lam: complex, cutoff: float
) -> FirstKindSolution:
    """Truncated-spectral pseudoinverse solve of M (A0 - lambda A) c = w.

    Singular values below cutoff * sigma_max are discarded;
    `discarded_energy` is the fraction of ||w||^2 lost to the discarded
    left singular directions. Raises DegenerateSystemError when nothing
    survives the cutoff.
    """
    if not 0 < cutoff < 1:
        raise ValueError("cutoff must lie in (0, 1)")
    system = fp.system_matrix(lam)
    u, sigma, vh = np.linalg.svd(system)
    if sigma.size == 0 or sigma[0] <= 0:
        raise DegenerateSystemError("system matrix is zero")
    keep = sigma >= cutoff * sigma[0]
    if not np.any(keep):
        raise DegenerateSystemError("all singular values fell below the cutoff")
    projections = u.conj().T @ fp.w
    inv = projections[keep] / sigma[keep]
    c = vh.conj().T[:, keep] @ inv
    total = float(np.linalg.norm(fp.w) ** 2)
    discarded = float(np.sum(np.abs(projections[~keep]) ** 2)) / total if total else 0.0
    return FirstKindSolution(
        coefficients=c, discarded_energy=discarded, kept=int(np.sum(keep))
    )


@dataclass(frozen=True)
class FirstKindSection:
    """First-kind diagnostics attached to an equivalence report when alpha = 0."""

    residual: float
    hs_norm_pencil: float
    carleman_sup: float
    multiplier_norm: float
    bound_slack: float
    coefficient_form_gap: float
    column_first_quarter_max: float
    column_last_quarter_max: float
    discarded_energy: float
    truncated_directions: int
    recovery_error: float

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "hs_norm_pencil": self.hs_norm_pencil,
            "carleman_sup": self.carleman_sup,
            "multiplier_norm": self.multiplier_norm,
            "bound_slack": self.bound_slack,
            "coefficient_form_gap": self.coefficient_form_gap,
            "column_first_quarter_max": self.column_first_quarter_max,
            "column_last_quarter_max": self.column_last_quarter_max,
            "discarded_energy": self.discarded_energy,
            "truncated_directions": self.truncated_directions,
            "recovery_error": self.recovery_error,
        }


@dataclass(frozen=True)
class EquivalenceReport:
    """Residuals and kernel diagnostics for one manufactured problem."""

    passage_residual: float
    round_trip_error: float
    condition: float
    hs_norm: float
    carleman_sup: float
    tail_sup: float
    discarded_energy: float | None = None
    first_kind: FirstKindSection | None = None
    projected: bool = False
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "passage_residual": self.passage_residual,
            "round_trip_error": self.round_trip_error,
            "condition": self.condition,
            "hs_norm": self.hs_norm,
            "carleman_sup": self.carleman_sup,
            "tail_sup": self.tail_sup,
            "discarded_energy": self.discarded_energy,
            "projected": self.projected,
        }
        if self.first_kind is not None:
            out["first_kind"] = self.first_kind.to_dict()
        out.update(self.extras)
        return out


def _relative(value: float, scale: float) -> float:
    return value / scale if scale > 0 else value


def verify_equivalence(
    p: ThirdKindProblem,
    alpha: complex,
    seq: KorotkovSequence,
    U: UnitarySurrogate,
    phi: GridFunction,
    probe_bound: float = 8.0,
    probe_points: int = 41,
    cutoff: float = 1e-10,
) -> EquivalenceReport:
    """Manufacture psi from phi, reduce, and measure every testable identity.

    Reports the relative passage residual ||alpha f + (A0 - lambda A) f - g||
    at f = U phi, the forward/inverse round trip error, and pencil-kernel
    diagnostics over the probe grid. With alpha = 0 the first-kind section is
    added: multiplied-system residual, Hilbert-Schmidt bound slack, adjoint
    column decay, and the truncated-spectral recovery error.
    """
    psi = forward_third_kind(p, phi)
    problem = ThirdKindProblem(p.coefficient, p.kernel, p.lam, psi)
    pencil, g = reduce_problem(problem, alpha, seq, U)
    f = U.forward(phi)

    lhs = alpha * f + (pencil.a0 - p.lam * pencil.a) @ f
    passage = _relative(float(np.linalg.norm(lhs - g)), float(np.linalg.norm(g)))
    round_trip_fn = U.inverse(f)
    diff = GridFunction(p.space, round_trip_fn.values - phi.values)
    round_trip = _relative(diff.norm(), phi.norm())

    system = pencil.system_matrix(p.lam)
    condition = float(np.linalg.cond(system))

    pk = pencil.pencil_kernel(p.lam)
    probes = probe_grid(probe_bound, probe_points)
    carleman_sup = float(np.max(carleman_row_norms(pk, probes)))
    tail = absolute_tail_sup(pk, probes, probes)

    discarded = None
    first_kind = None
    if alpha == 0:
        m = Multiplier("gaussian")
        fk = make_first_kind(pencil, m, g)
        fk_system = fk.system_matrix(p.lam)
        fk_residual = _relative(
            float(np.linalg.norm(fk_system @ f - fk.w)), float(np.linalg.norm(fk.w))
        )
        gamma_pencil = fk.gamma_pencil(p.lam)
        hs_gamma = hs_norm(gamma_pencil)
        # sup_s ||t(s)|| of the plain pencil feeds the Hilbert-Schmidt bound
        bound = carleman_sup * m.l2_norm
        slack = max(0.0, hs_gamma - bound)
        gap = coefficient_form_gap(gamma_pencil, probes, probes)
        first_q, last_q = adjoint_column_quarter_maxima(fk_system)
        try:
            sol = solve_first_kind(fk, p.lam, cutoff)
            discarded = sol.discarded_energy
            truncated = pencil.size - sol.kept
            recovery = _relative(
                float(np.linalg.norm(sol.coefficients - f)), float(np.linalg.norm(f))
            )
        except DegenerateSystemError:
            discarded = 1.0
            truncated = pencil.size
            recovery = float("inf")
        first_kind = FirstKindSection(
            residual=fk_residual,
            hs_norm_pencil=hs_gamma,
            carleman_sup=carleman_sup,
            multiplier_norm=m.l2_norm,
            bound_slack=slack,
            coefficient_form_gap=gap,
            column_first_quarter_max=first_q,
            column_last_quarter_max=last_q,
            discarded_energy=discarded,
            truncated_directions=truncated,
            recovery_error=recovery,
        )

    return EquivalenceReport(
        passage_residual=passage,
        round_trip_error=round_trip,
        condition=condition,
        hs_norm=hs_norm(pk),
        carleman_sup=carleman_sup,
        tail_sup=tail,
        discarded_energy=discarded,
        first_kind=first_kind,
        projected=U.projected,
    )
