"""Forward model, reduction identities, and the reduced solvers."""

import math

import numpy as np
import pytest

from thirdkind import (
    AlphaNotZeroError,
    DegenerateSystemError,
    GridFunction,
    GridKernel,
    KernelPencil,
    Multiplier,
    NearSingularError,
    SmoothBasis,
    ThirdKindProblem,
    UnitarySurrogate,
    build_sequence,
    build_space,
    forward_third_kind,
    make_first_kind,
    reduce_problem,
    solve_first_kind,
    solve_second_kind,
    verify_equivalence,
)
from thirdkind.pipeline import random_grid_function


def exp_kernel(space, scale=1.0):
    c = space.centers()
    return GridKernel(space, np.exp(scale * np.outer(c, c)))


def product_kernel(space):
    c = space.centers()
    return GridKernel(space, np.outer(c, c))


def build_chain(depth, alpha, kernel_factory=exp_kernel, bands=3, eps0=0.25):
    space = build_space(depth)
    H = GridFunction.sample(space, lambda y: y)
    K = kernel_factory(space)
    seq = build_sequence(H, K, alpha, bands, eps0, 0.5, depth_max=depth + 4)
    U = UnitarySurrogate.from_sequence(seq, seq.space, "full")
    return seq.coefficient, seq.kernel, seq, U


class TestForward:
    def test_lambda_zero_is_multiplication(self):
        space = build_space(4)
        H = GridFunction.sample(space, lambda y: y * y)
        K = exp_kernel(space)
        rng = np.random.default_rng(61)
        phi = random_grid_function(rng, space)
        p = ThirdKindProblem(H, K, 0.0)
        out = forward_third_kind(p, phi)
        np.testing.assert_allclose(out.values, H.values * phi.values, atol=1e-14)

    def test_pure_integral_part(self):
        # H = 0, K = 1, lambda = 1, phi = 1: psi = -integral of phi = -1
        space = build_space(5)
        H = GridFunction.zero(space)
        K = GridKernel(space, np.ones((32, 32)))
        phi = GridFunction.constant(space, 1.0)
        out = forward_third_kind(ThirdKindProblem(H, K, 1.0), phi)
        np.testing.assert_allclose(out.values, -1.0, atol=1e-14)

    def test_zero_input(self):
        space = build_space(4)
        p = ThirdKindProblem(
            GridFunction.sample(space, lambda y: y), exp_kernel(space), 0.5
        )
        out = forward_third_kind(p, GridFunction.zero(space))
        np.testing.assert_array_equal(out.values, 0.0)

    def test_manufactured_problem_carries_rhs(self):
        space = build_space(4)
        rng = np.random.default_rng(62)
        phi = random_grid_function(rng, space)
        p = ThirdKindProblem.manufactured(
            GridFunction.sample(space, lambda y: y), exp_kernel(space), 0.3, phi
        )
        assert p.rhs is not None
        np.testing.assert_allclose(
            p.rhs.values, forward_third_kind(p, phi).values, atol=1e-15
        )


class TestReduce:
    def test_passage_identity_lambda_zero(self):
        H, K, seq, U = build_chain(6, alpha=0.5)
        rng = np.random.default_rng(64)
        phi = random_grid_function(rng, seq.space)
        p = ThirdKindProblem.manufactured(H, K, 0.0, phi)
        pencil, g = reduce_problem(p, 0.5, seq, U)
        f = U.forward(phi)
        lhs = 0.5 * f + (pencil.a0 - 0.0 * pencil.a) @ f
        assert np.linalg.norm(lhs - g) <= 1e-10 * np.linalg.norm(g)

    def test_full_pipeline_depth_eight(self):
        H, K, seq, U = build_chain(8, alpha=0.0)
        rng = np.random.default_rng(65)
        phi = random_grid_function(rng, seq.space)
        lam = 0.3
        p = ThirdKindProblem.manufactured(H, K, lam, phi)
        pencil, g = reduce_problem(p, 0.0, seq, U)
        f = U.forward(phi)
        lhs = (pencil.a0 - lam * pencil.a) @ f
        assert np.linalg.norm(lhs - g) <= 1e-9 * np.linalg.norm(g)

    def test_requires_rhs(self):
        H, K, seq, U = build_chain(5, alpha=0.25, bands=2)
        p = ThirdKindProblem(H, K, 0.3)
        with pytest.raises(ValueError):
            reduce_problem(p, 0.25, seq, U)

    def test_pencil_is_affine_in_lambda(self):
        H, K, seq, U = build_chain(6, alpha=0.25)
        rng = np.random.default_rng(66)
        phi = random_grid_function(rng, seq.space)
        p = ThirdKindProblem.manufactured(H, K, 0.3, phi)
        pencil, _ = reduce_problem(p, 0.25, seq, U)
        lam = 1.3 - 0.4j
        direct = pencil.system_matrix(lam)
        affine = pencil.system_matrix(0.0) - lam * pencil.a
        np.testing.assert_array_equal(direct, affine)


class TestSolveSecondKind:
    def identity_pencil(self, n=4, alpha=1.0):
        return KernelPencil(
            alpha=alpha,
            a0=np.zeros((n, n), dtype=complex),
            a=np.zeros((n, n), dtype=complex),
            basis=SmoothBasis(n),
        )

    def test_identity_system(self):
        pencil = self.identity_pencil()
        g = np.array([1.0, 2.0, -1.0, 0.5], dtype=complex)
        sol = solve_second_kind(pencil, 0.7, g)
        np.testing.assert_allclose(sol.coefficients, g, atol=1e-14)
        assert sol.residual <= 1e-10

    def test_scalar_rank_one(self):
        # (1 - 1/2) c0 = 1 on the first mode
        n = 3
        a = np.zeros((n, n), dtype=complex)
        a[0, 0] = 1.0
        pencil = KernelPencil(1.0, np.zeros((n, n), dtype=complex), a, SmoothBasis(n))
        g = np.zeros(n, dtype=complex)
        g[0] = 1.0
        sol = solve_second_kind(pencil, 0.5, g)
        np.testing.assert_allclose(sol.coefficients, 2.0 * g, atol=1e-12)

    def test_near_singular(self):
        n = 3
        a = np.zeros((n, n), dtype=complex)
        a[0, 0] = 1.0
        pencil = KernelPencil(1.0, np.zeros((n, n), dtype=complex), a, SmoothBasis(n))
        with pytest.raises(NearSingularError):
            solve_second_kind(pencil, 1.0, np.ones(n, dtype=complex))

    def test_alpha_zero_rejected(self):
        pencil = self.identity_pencil(alpha=0.0)
        with pytest.raises(ValueError):
            solve_second_kind(pencil, 0.1, np.zeros(4, dtype=complex))

    def test_substitution_residual(self):
        rng = np.random.default_rng(67)
        n = 12
        pencil = KernelPencil(
            1.5,
            rng.standard_normal((n, n)) * 0.1 + 0j,
            rng.standard_normal((n, n)) * 0.1 + 0j,
            SmoothBasis(n),
        )
        g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        sol = solve_second_kind(pencil, 0.8 + 0.1j, g)
        assert sol.residual <= 1e-10
        assert sol.condition < 1e3


class TestFirstKind:
    def pencil_from_chain(self, depth=4):
        H, K, seq, U = build_chain(depth, alpha=0.0, bands=2, eps0=0.5)
        rng = np.random.default_rng(68)
        phi = random_grid_function(rng, seq.space)
        p = ThirdKindProblem.manufactured(H, K, 0.3, phi)
        pencil, g = reduce_problem(p, 0.0, seq, U)
        return pencil, g, U.forward(phi)

    def test_zero_rhs(self):
        pencil, g, _ = self.pencil_from_chain()
        fp = make_first_kind(pencil, Multiplier(), np.zeros_like(g))
        np.testing.assert_array_equal(fp.w, 0.0)

    def test_alpha_not_zero_rejected(self):
        n = 4
        pencil = KernelPencil(
            0.5, np.zeros((n, n), dtype=complex), np.zeros((n, n), dtype=complex),
            SmoothBasis(n),
        )
        with pytest.raises(AlphaNotZeroError):
            make_first_kind(pencil, Multiplier(), np.zeros(n, dtype=complex))

    def test_hs_bound_with_gaussian_multiplier(self):
        from thirdkind import hs_norm
        from thirdkind.kernels import carleman_row_norms, probe_grid

        pencil, g, _ = self.pencil_from_chain()
        fp = make_first_kind(pencil, Multiplier(), g)
        gamma = fp.gamma()
        plain = pencil.kernel_t()
        sup = float(np.max(carleman_row_norms(plain, probe_grid(8.0, 161))))
        assert hs_norm(gamma) <= sup * math.pi**0.25 + 1e-12

    def test_multiplied_identity_preserved(self):
        pencil, g, f = self.pencil_from_chain()
        fp = make_first_kind(pencil, Multiplier(), g)
        lhs = fp.system_matrix(0.3) @ f
        assert np.linalg.norm(lhs - fp.w) <= 1e-9 * np.linalg.norm(fp.w)

    def test_identity_system_any_cutoff(self):
        n = 5
        pencil = KernelPencil(
            0.0, np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex),
            SmoothBasis(n),
        )
        m = Multiplier("one")
        g = np.arange(1.0, n + 1.0).astype(complex)
        fp = make_first_kind(pencil, m, g, quad_nodes=2 * n + 32)
        # M = I here, so the system is the identity for every cutoff
        for cutoff in (1e-12, 1e-6, 0.5):
            sol = solve_first_kind(fp, 0.0, cutoff)
            np.testing.assert_allclose(sol.coefficients, g, atol=1e-12)
            assert sol.discarded_energy == 0.0

    def test_manufacture_then_solve_recovery(self):
        # wide bands keep the grid at depth 4 (16 modes), where the
        # multiplier matrix is far from its truncation floor
        H, K, seq, U = build_chain(4, alpha=0.0, bands=2, eps0=1.0)
        rng = np.random.default_rng(69)
        phi = random_grid_function(rng, seq.space)
        p = ThirdKindProblem.manufactured(H, K, 0.3, phi)
        pencil, g = reduce_problem(p, 0.0, seq, U)
        fp = make_first_kind(pencil, Multiplier(), g)
        n = pencil.size
        c0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        system = fp.system_matrix(0.3)
        # well-conditioned at this size: nothing gets truncated
        assert np.linalg.cond(system) < 1e7
        fp2 = type(fp)(
            pencil=fp.pencil,
            multiplier=fp.multiplier,
            m_matrix=fp.m_matrix,
            w=system @ c0,
        )
        sol = solve_first_kind(fp2, 0.3, 1e-10)
        assert sol.kept == n
        assert np.linalg.norm(sol.coefficients - c0) <= 1e-8 * np.linalg.norm(c0)

    def test_degenerate_system(self):
        n = 4
        pencil = KernelPencil(
            0.0, np.zeros((n, n), dtype=complex), np.zeros((n, n), dtype=complex),
            SmoothBasis(n),
        )
        fp = make_first_kind(pencil, Multiplier(), np.ones(n, dtype=complex))
        with pytest.raises(DegenerateSystemError):
            solve_first_kind(fp, 0.5, 1e-10)

    def test_cutoff_range_checked(self):
        pencil, g, _ = self.pencil_from_chain()
        fp = make_first_kind(pencil, Multiplier(), g)
        with pytest.raises(ValueError):
            solve_first_kind(fp, 0.3, 0.0)
        with pytest.raises(ValueError):
            solve_first_kind(fp, 0.3, 1.0)


class TestVerifyEquivalence:
    def test_zero_solution_zero_residuals(self):
        H, K, seq, U = build_chain(5, alpha=0.25, bands=2)
        p = ThirdKindProblem(H, K, 1.0)
        report = verify_equivalence(p, 0.25, seq, U, GridFunction.zero(seq.space))
        assert report.passage_residual == 0.0
        assert report.round_trip_error == 0.0

    def test_depth_six_product_kernel(self):
        H, K, seq, U = build_chain(6, alpha=0.25, kernel_factory=product_kernel)
        rng = np.random.default_rng(70)
        phi = random_grid_function(rng, seq.space)
        p = ThirdKindProblem(H, K, 1.0)
        report = verify_equivalence(p, 0.25, seq, U, phi)
        assert report.passage_residual <= 1e-9
        assert report.round_trip_error <= 1e-9
        assert report.first_kind is None

    def test_alpha_zero_adds_first_kind_section(self):
        H, K, seq, U = build_chain(6, alpha=0.0)
        rng = np.random.default_rng(71)
        phi = random_grid_function(rng, seq.space)
        p = ThirdKindProblem(H, K, 0.4)
        report = verify_equivalence(p, 0.0, seq, U, phi)
        fk = report.first_kind
        assert fk is not None
        assert fk.residual <= 1e-9
        assert fk.bound_slack <= 1e-9
        assert fk.hs_norm_pencil <= fk.carleman_sup * fk.multiplier_norm + 1e-9

    def test_report_serializes(self):
        H, K, seq, U = build_chain(5, alpha=0.25, bands=2)
        rng = np.random.default_rng(72)
        phi = random_grid_function(rng, seq.space)
        report = verify_equivalence(ThirdKindProblem(H, K, 0.2), 0.25, seq, U, phi)
        d = report.to_dict()
        for key in (
            "passage_residual",
            "round_trip_error",
            "condition",
            "hs_norm",
            "carleman_sup",
            "tail_sup",
            "discarded_energy",
        ):
            assert key in d

    def test_randomized_equivalence_battery(self):
        from thirdkind.pipeline import build_problem_instance, random_problem_instance

        rng = np.random.default_rng(73)
        for _ in range(5):
            inst = random_problem_instance(rng, depth=int(rng.integers(6, 8)))
            H, K, seq, U = build_problem_instance(inst)
            phi = random_grid_function(rng, seq.space)
            p = ThirdKindProblem(H, K, inst["lambda"])
            report = verify_equivalence(p, inst["alpha"], seq, U, phi)
            assert report.passage_residual <= 1e-9
