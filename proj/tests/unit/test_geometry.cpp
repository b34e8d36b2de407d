#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "shearflow/basis.hpp"
#include "shearflow/error.hpp"
#include "shearflow/geometry.hpp"

using namespace shearflow;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

ChannelGeometry unit_channel(double L = kTwoPi) {
    return build_channel(L, HeightProfile{1.0, {}, {}});
}

// Independent quadrature route for the oracle checks: dense uniform tensor
// grid with midpoint weights in physical coordinates.
struct FineGrid {
    Eigen::MatrixXd mass, stiffness, boundary;
};

FineGrid fine_grid_grams(const DivFreeBasis& basis, int n1, int n2) {
    const int N = basis.size();
    FineGrid g;
    g.mass = Eigen::MatrixXd::Zero(N, N);
    g.stiffness = Eigen::MatrixXd::Zero(N, N);
    g.boundary = Eigen::MatrixXd::Zero(N, N);
    const double L = basis.geometry.L;
    std::vector<ModePoint> pts(N);
    for (int p = 0; p < n1; ++p) {
        const double x1 = L * (double(p) + 0.5) / double(n1);
        const double h = basis.geometry.height(x1);
        for (int q = 0; q < n2; ++q) {
            const double x2 = h * (double(q) + 0.5) / double(n2);
            const double w = (L / n1) * (h / n2);
            for (int i = 0; i < N; ++i) pts[i] = basis.eval_mode(i, x1, x2);
            for (int i = 0; i < N; ++i)
                for (int j = i; j < N; ++j) {
                    g.mass(i, j) += w * (pts[i].v1 * pts[j].v1 + pts[i].v2 * pts[j].v2);
                    g.stiffness(i, j) +=
                        w * (pts[i].g11 * pts[j].g11 + pts[i].g12 * pts[j].g12 +
                             pts[i].g21 * pts[j].g21 + pts[i].g22 * pts[j].g22);
                }
        }
        for (int i = 0; i < N; ++i) pts[i] = basis.eval_mode(i, x1, 0.0);
        for (int i = 0; i < N; ++i)
            for (int j = i; j < N; ++j)
                g.boundary(i, j) += (L / n1) * (pts[i].v2 * pts[j].v2 + pts[i].v1 * pts[j].v1);
    }
    g.mass = g.mass.selfadjointView<Eigen::Upper>();
    g.stiffness = g.stiffness.selfadjointView<Eigen::Upper>();
    g.boundary = g.boundary.selfadjointView<Eigen::Upper>();
    return g;
}
}  // namespace

TEST_CASE("build_channel constant profile") {
    const ChannelGeometry geom = unit_channel();
    CHECK(geom.h0 == doctest::Approx(1.0));
    CHECK(geom.gamma0_measure() == doctest::Approx(kTwoPi));
    CHECK(geom.area() == doctest::Approx(kTwoPi));
}

TEST_CASE("build_channel sinusoid minimum") {
    HeightProfile h;
    h.mean = 1.0;
    h.sin_coeffs = {0.1};
    const ChannelGeometry geom = build_channel(1.0, h);
    CHECK(geom.h0 == doctest::Approx(0.9).epsilon(1e-6));
    // periodicity of the profile itself
    CHECK(h.value(0.0, 1.0) == doctest::Approx(h.value(1.0, 1.0)));
}

TEST_CASE("build_channel rejects bad input") {
    CHECK_THROWS_AS(build_channel(1.0, HeightProfile{-1.0, {}, {}}), Error);
    CHECK_THROWS_AS(build_channel(-2.0, HeightProfile{1.0, {}, {}}), Error);
    CHECK_THROWS_AS(build_channel(0.0, HeightProfile{1.0, {}, {}}), Error);
    HeightProfile dipping;
    dipping.mean = 0.05;
    dipping.cos_coeffs = {0.1};
    CHECK_THROWS_AS(build_channel(1.0, dipping), Error);
}

TEST_CASE("K=0 single profile mode has no vertical velocity") {
    const DivFreeBasis basis = build_basis(unit_channel(), 0, 1);
    REQUIRE(basis.size() == 1);
    for (int q = 0; q < basis.node_weight.size(); ++q) CHECK(basis.val2(0, q) == 0.0);
}

TEST_CASE("profiles vanishing at the wall give zero normal-trace rows") {
    const DivFreeBasis basis = build_basis(unit_channel(), 2, 3);
    REQUIRE(basis.size() == 15);  // (1 + 2*2) Fourier components x 3 profiles
    for (int i = 0; i < basis.size(); ++i) {
        if (basis.modes[i].m == basis.M) continue;  // the wall-leak profile
        for (int p = 0; p < basis.nx1(); ++p) CHECK(basis.trace_normal(p, i) == 0.0);
    }
    // the leak profile with k >= 1 does carry normal trace
    double max_trace = 0.0;
    for (int i = 0; i < basis.size(); ++i)
        if (basis.modes[i].m == basis.M && basis.modes[i].k > 0)
            max_trace = std::max(max_trace, basis.trace_normal.col(i).cwiseAbs().maxCoeff());
    CHECK(max_trace > 0.1);
}

TEST_CASE("mode fields: divergence-free and boundary conditions") {
    HeightProfile h;
    h.mean = 1.0;
    h.cos_coeffs = {0.15};
    h.sin_coeffs = {0.0, 0.05};
    for (const ChannelGeometry& geom : {unit_channel(), build_channel(kTwoPi, h)}) {
        const DivFreeBasis basis = build_basis(geom, 2, 3);
        double max_div = 0.0, max_top = 0.0, max_tan = 0.0;
        for (int i = 0; i < basis.size(); ++i) {
            for (int q = 0; q < basis.node_weight.size(); ++q)
                max_div = std::max(max_div, std::abs(basis.g11(i, q) + basis.g22(i, q)));
            for (int p = 0; p < basis.nx1(); ++p) {
                const double x1 = basis.x1_nodes[p] + 0.123;  // off the assembly nodes
                const ModePoint top = basis.eval_mode(i, x1, geom.height(x1));
                max_top = std::max({max_top, std::abs(top.v1), std::abs(top.v2)});
                const ModePoint bot = basis.eval_mode(i, x1, 0.0);
                max_tan = std::max(max_tan, std::abs(bot.v1));
            }
        }
        CHECK(max_div < 1e-12);
        CHECK(max_top < 1e-12);
        CHECK(max_tan < 1e-12);
    }
}

TEST_CASE("gram matrices: symmetric positive definite, rot = grad form") {
    const DivFreeBasis basis = build_basis(unit_channel(), 2, 3);
    CHECK((basis.mass_matrix - basis.mass_matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((basis.stiffness_matrix - basis.stiffness_matrix.transpose()).cwiseAbs().maxCoeff() <
          1e-12);
    Eigen::LLT<Eigen::MatrixXd> llt_m(basis.mass_matrix);
    Eigen::LLT<Eigen::MatrixXd> llt_s(basis.stiffness_matrix);
    CHECK(llt_m.info() == Eigen::Success);
    CHECK(llt_s.info() == Eigen::Success);
    // identity (2.8): int rot.rot = int grad:grad on V, entrywise
    CHECK((basis.rotrot_matrix - basis.stiffness_matrix).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(basis.stiffness_matrix);
    const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    CHECK(cond > 1.0);
    CHECK(std::isfinite(cond));
}

TEST_CASE("rot/grad identity holds on a variable-height channel") {
    HeightProfile h;
    h.mean = 1.0;
    h.cos_coeffs = {0.1};
    const DivFreeBasis basis = build_basis(build_channel(kTwoPi, h), 2, 3);
    const double scale = basis.stiffness_matrix.cwiseAbs().maxCoeff();
    CHECK((basis.rotrot_matrix - basis.stiffness_matrix).cwiseAbs().maxCoeff() < 1e-10 * scale);
}

TEST_CASE("stokes eigenpairs ascending, positive, mass-orthonormal") {
    const DivFreeBasis basis = build_basis(unit_channel(), 2, 3);
    CHECK(basis.stokes_values[0] > 0.0);
    for (int i = 1; i < basis.size(); ++i)
        CHECK(basis.stokes_values[i] >= basis.stokes_values[i - 1]);
    const Eigen::MatrixXd gram =
        basis.stokes_vectors.transpose() * basis.mass_matrix * basis.stokes_vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff() <
          1e-9);
}

TEST_CASE("trace_norm: zero for K=0, monotone under nesting, matches fine grid") {
    // K = 0 modes have v_N = 0 identically (normal trace needs tau').
    const DivFreeBasis flat = build_basis(unit_channel(), 0, 3);
    CHECK(trace_norm(flat) == doctest::Approx(0.0).epsilon(1e-14));

    const DivFreeBasis small = build_basis(unit_channel(), 1, 2);
    const DivFreeBasis mid = build_basis(unit_channel(), 2, 3);
    const DivFreeBasis big = build_basis(unit_channel(), 4, 6);
    const double t1 = trace_norm(small), t2 = trace_norm(mid), t3 = trace_norm(big);
    CHECK(t1 <= t2 * (1 + 1e-12));
    CHECK(t2 <= t3 * (1 + 1e-12));

    // fine-grid oracle: same span, independent quadrature
    const FineGrid g = fine_grid_grams(big, 512, 400);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(g.boundary, g.stiffness,
                                                                  Eigen::EigenvaluesOnly);
    const double oracle = std::sqrt(std::max(0.0, ges.eigenvalues().maxCoeff()));
    CHECK(t3 == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("poincare lambda1: positive, monotone, matches fine grid") {
    const DivFreeBasis small = build_basis(unit_channel(), 1, 2);
    const DivFreeBasis mid = build_basis(unit_channel(), 2, 3);
    const DivFreeBasis big = build_basis(unit_channel(), 4, 6);
    const double l1 = poincare_lambda1(small), l2 = poincare_lambda1(mid),
                 l3 = poincare_lambda1(big);
    CHECK(l1 > 0.0);
    CHECK(l2 <= l1 * (1 + 1e-12));
    CHECK(l3 <= l2 * (1 + 1e-12));

    const FineGrid g = fine_grid_grams(big, 512, 400);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(g.stiffness, g.mass,
                                                                  Eigen::EigenvaluesOnly);
    CHECK(l3 == doctest::Approx(ges.eigenvalues().minCoeff()).epsilon(0.01));
}

TEST_CASE("build_basis rejects degenerate inputs") {
    CHECK_THROWS_AS(build_basis(unit_channel(), -1, 2), Error);
    CHECK_THROWS_AS(build_basis(unit_channel(), 1, 0), Error);
}
