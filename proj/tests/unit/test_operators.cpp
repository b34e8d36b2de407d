#include <doctest.h>

#include <cmath>
#include <random>

#include "shearflow/error.hpp"
#include "shearflow/operators.hpp"

using namespace shearflow;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

ChannelGeometry unit_channel() { return build_channel(kTwoPi, HeightProfile{1.0, {}, {}}); }

Eigen::VectorXd random_coeffs(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = normal(rng);
    return a;
}
}  // namespace

TEST_CASE("build_lift: zero slide speed gives the zero field") {
    const ChannelGeometry geom = unit_channel();
    const LiftField lift = build_lift(0.0, 0.3, geom);
    CHECK(lift.t0 == doctest::Approx(1.0));  // min{h0, 1} when s = 0
    for (double x2 : {0.0, 0.1, 0.5, 0.99}) {
        CHECK(lift.value(x2) == 0.0);
        CHECK(lift.deriv(x2) == 0.0);
    }
    const DivFreeBasis basis = build_basis(geom, 1, 2);
    const OperatorSet ops = assemble_operators(basis, 1.0, lift);
    CHECK(ops.f_vector.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ops.g_vw.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ops.g_wv.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ops.f_dual_norm == 0.0);
}

TEST_CASE("build_lift: support formula and endpoint values") {
    const ChannelGeometry geom = unit_channel();
    const LiftField lift = build_lift(1.0, 0.5, geom);
    CHECK(lift.t0 == doctest::Approx(0.25));  // min{lambda/(2|s|), h0, 1}
    CHECK(lift.value(0.0) == doctest::Approx(1.0));
    CHECK(lift.value(0.25) == 0.0);
    CHECK(lift.value(0.3) == 0.0);
    CHECK(lift.value(0.9) == 0.0);
    // rho'(0) = 0 and monotone decay inside the support
    CHECK(std::abs(lift.deriv(1e-9)) < 1e-6);
    CHECK(lift.value(0.05) > lift.value(0.1));
    // larger |s| narrows the support
    CHECK(build_lift(4.0, 0.5, geom).t0 == doctest::Approx(0.0625));
    CHECK_THROWS_AS(build_lift(1.0, -0.1, geom), Error);
}

TEST_CASE("lift bound: spectral radius and randomized draws") {
    const ChannelGeometry geom = unit_channel();
    const DivFreeBasis basis = build_basis(geom, 3, 4);
    for (double lambda : {0.05, 0.2}) {
        const LiftField lift = build_lift(1.0, lambda, geom);
        const OperatorSet ops = assemble_operators(basis, 1.0, lift);
        const LiftBoundReport report = lift_bound_check(basis, ops, 1000, 42);
        CHECK(report.spectral_radius <= lambda);
        CHECK(report.violations == 0);
        CHECK(report.max_ratio <= report.spectral_radius * (1 + 1e-12));
        CHECK(report.passed);
    }
}

TEST_CASE("operator identities: A and the skew form") {
    const ChannelGeometry geom = unit_channel();
    const DivFreeBasis basis = build_basis(geom, 2, 3);
    const LiftField lift = build_lift(1.0, 0.2, geom);
    const double nu = 0.7;
    const OperatorSet ops = assemble_operators(basis, nu, lift);
    std::mt19937_64 rng(5);
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd a = random_coeffs(basis.size(), rng);
        const Eigen::VectorXd b = random_coeffs(basis.size(), rng);
        const double vv = a.dot(basis.stiffness_matrix * a);
        CHECK(std::abs(a.dot(ops.a_matrix * a) - nu * vv) / (nu * vv) < 1e-10);
        // <B(u,v),v> = 0: tensor contraction of (b, a, a)
        double form = 0.0;
        for (int i = 0; i < basis.size(); ++i) form += b[i] * a.dot(ops.b_tensor[i] * a);
        const double scale = basis.v_norm(b) * basis.v_norm(a) * basis.v_norm(a);
        CHECK(std::abs(form) < 1e-10 * scale);
    }
}

TEST_CASE("convection tensor is antisymmetric in the trailing pair") {
    const DivFreeBasis basis = build_basis(unit_channel(), 1, 2);
    const OperatorSet ops = assemble_operators(basis, 1.0, build_lift(0.5, 0.2, basis.geometry));
    for (const Eigen::MatrixXd& t : ops.b_tensor)
        CHECK((t + t.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense tensor contraction matches on-the-fly quadrature") {
    const DivFreeBasis basis = build_basis(unit_channel(), 2, 3);
    const LiftField lift = build_lift(1.0, 0.2, basis.geometry);
    const OperatorSet dense = assemble_operators(basis, 1.0, lift);
    const OperatorSet lazy = assemble_operators(basis, 1.0, lift, /*dense_tensor_limit=*/0);
    CHECK(dense.has_tensor());
    CHECK(!lazy.has_tensor());
    std::mt19937_64 rng(9);
    for (int it = 0; it < 20; ++it) {
        Eigen::VectorXd a = random_coeffs(basis.size(), rng);
        a /= basis.v_norm(a);
        const Eigen::VectorXd cd = dense.convection(basis, a);
        const Eigen::VectorXd cq = lazy.convection(basis, a);
        CHECK((cd - cq).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dual norm: Riesz scaling, zero load, mass load bound") {
    const DivFreeBasis basis = build_basis(unit_channel(), 2, 3);
    const double nu = 1.3;
    const OperatorSet ops = assemble_operators(basis, nu, build_lift(1.0, 0.2, basis.geometry));
    std::mt19937_64 rng(13);
    const double lambda1 = poincare_lambda1(basis);
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd a = random_coeffs(basis.size(), rng);
        const double vn = basis.v_norm(a);
        CHECK(std::abs(ops.dual_norm(ops.a_matrix * a) - nu * vn) / (nu * vn) < 1e-10);
        const double mass_dual = ops.dual_norm(basis.mass_matrix * a);
        CHECK(mass_dual <= basis.h_norm(a) / std::sqrt(lambda1) * (1 + 1e-10));
    }
    CHECK(ops.dual_norm(Eigen::VectorXd::Zero(basis.size())) == 0.0);
    CHECK(dual_norm(ops.f_vector, basis) == doctest::Approx(ops.f_dual_norm));
}

TEST_CASE("boundary identities on random span elements") {
    const DivFreeBasis basis = build_basis(unit_channel(), 3, 4);
    const OperatorSet ops = assemble_operators(basis, 1.0, build_lift(1.0, 0.2, basis.geometry));
    const BoundaryIdentityReport report = boundary_identity_check(basis, ops, 32, 17);
    CHECK(report.max_interior_residual < 1e-8);
    CHECK(report.max_boundary_residual < 1e-8);
    CHECK(report.max_vv_residual < 1e-8);
    // boundary term is genuinely active: normal trace does not vanish
    CHECK(trace_norm(basis) > 0.01);
}

TEST_CASE("lift rot/grad identity (the strip form of (2.8))") {
    const DivFreeBasis basis = build_basis(unit_channel(), 1, 2);
    const LiftField lift = build_lift(1.0, 0.2, basis.geometry);
    const OperatorSet ops = assemble_operators(basis, 1.0, lift);
    double rot2 = 0.0, grad2 = 0.0;
    for (int q = 0; q < ops.strip_weight.size(); ++q) {
        const double d = lift.deriv(ops.strip_x2[q]);
        rot2 += ops.strip_weight[q] * ops.strip_rotw[q] * ops.strip_rotw[q];
        grad2 += ops.strip_weight[q] * d * d;
    }
    CHECK(rot2 > 1.0);  // nontrivial
    CHECK(std::abs(rot2 - grad2) < 1e-10 * rot2);
}

TEST_CASE("geometry mismatch is rejected") {
    const DivFreeBasis basis = build_basis(unit_channel(), 1, 2);
    const ChannelGeometry other = build_channel(1.0, HeightProfile{1.0, {}, {}});
    const LiftField lift = build_lift(1.0, 0.2, other);
    CHECK_THROWS_AS(assemble_operators(basis, 1.0, lift), Error);
}

TEST_CASE("g operator norm bounds the coupling on random draws") {
    const DivFreeBasis basis = build_basis(unit_channel(), 2, 3);
    const OperatorSet ops = assemble_operators(basis, 1.0, build_lift(1.0, 0.2, basis.geometry));
    const double gn = g_operator_norm(basis, ops);
    std::mt19937_64 rng(23);
    for (int it = 0; it < 50; ++it) {
        Eigen::VectorXd a = random_coeffs(basis.size(), rng);
        CHECK(ops.dual_norm(ops.g_apply(a)) <= gn * basis.v_norm(a) * (1 + 1e-9));
    }
}
