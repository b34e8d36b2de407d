#include "shearflow/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "shearflow/detail/gauss.hpp"
#include "shearflow/error.hpp"
#include "shearflow/rng.hpp"

namespace shearflow {

namespace {
// Bump profile on u in [0,1): rho_hat(u) = e * exp(-1/(1-u^2)), so
// rho_hat(0) = 1, rho_hat'(0) = 0, supp inside [0,1).
double bump_value(double u) {
    if (u >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}
double bump_g1(double u) {  // d/du of -1/(1-u^2)
    const double d = 1.0 - u * u;
    return -2.0 * u / (d * d);
}
double bump_g2(double u) {
    const double d = 1.0 - u * u;
    return -(2.0 + 6.0 * u * u) / (d * d * d);
}
}  // namespace

double LiftField::value(double x2) const {
    if (s == 0.0) return 0.0;
    const double w = support();
    if (x2 >= w) return 0.0;
    return s * bump_value(x2 / w);
}

double LiftField::deriv(double x2) const {
    if (s == 0.0) return 0.0;
    const double w = support();
    if (x2 >= w) return 0.0;
    const double u = x2 / w;
    return s * bump_value(u) * bump_g1(u) / w;
}

double LiftField::deriv2(double x2) const {
    if (s == 0.0) return 0.0;
    const double w = support();
    if (x2 >= w) return 0.0;
    const double u = x2 / w;
    const double g1 = bump_g1(u);
    return s * bump_value(u) * (g1 * g1 + bump_g2(u)) / (w * w);
}

LiftField build_lift(double s, double lambda, const ChannelGeometry& geom, double alpha) {
    if (!(lambda > 0.0))
        throw Error(ErrorCode::ConfigType, "operators", "lift smallness lambda must be positive",
                    std::to_string(lambda));
    if (!(alpha > 0.0) || alpha > 1.0)
        throw Error(ErrorCode::ConfigType, "operators", "bump narrowing alpha must be in (0,1]",
                    std::to_string(alpha));
    LiftField lift;
    lift.s = s;
    lift.lambda = lambda;
    lift.alpha = alpha;
    lift.h0 = geom.h0;
    lift.geometry_hash = geom.content_hash();
    // s = 0 makes the amplitude vanish; the support formula then drops the
    // lambda/(2|s|) term.
    lift.t0 = s == 0.0 ? std::min(geom.h0, 1.0)
                       : std::min({lambda / (2.0 * std::abs(s)), geom.h0, 1.0});
    return lift;
}

Eigen::VectorXd OperatorSet::convection_quadrature(const DivFreeBasis& basis,
                                                   const Eigen::VectorXd& a) const {
    const Eigen::VectorXd rota = basis.rotv.transpose() * a;
    const Eigen::VectorXd u1 = basis.val1.transpose() * a;
    const Eigen::VectorXd u2 = basis.val2.transpose() * a;
    const Eigen::ArrayXd m = basis.node_weight.array() * rota.array();
    return basis.val2 * (m * u1.array()).matrix() - basis.val1 * (m * u2.array()).matrix();
}

Eigen::VectorXd OperatorSet::convection(const DivFreeBasis& basis, const Eigen::VectorXd& a) const {
    if (!has_tensor()) return convection_quadrature(basis, a);
    const int N = int(a.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
    for (int i = 0; i < N; ++i)
        if (a[i] != 0.0) out.noalias() += a[i] * (b_tensor[i].transpose() * a);
    return out;
}

Eigen::VectorXd OperatorSet::g_apply(const Eigen::VectorXd& a) const {
    return -(g_vw.transpose() * a + g_wv.transpose() * a);
}

double OperatorSet::dual_norm(const Eigen::VectorXd& load) const {
    return std::sqrt(std::max(0.0, load.dot(stiffness_llt.solve(load))));
}

OperatorSet assemble_operators(const DivFreeBasis& basis, double nu, const LiftField& lift,
                               int dense_tensor_limit) {
    if (lift.geometry_hash != basis.geometry.content_hash())
        throw Error(ErrorCode::GeometryMismatch, "operators",
                    "lift was built for a different geometry");
    OperatorSet ops;
    ops.nu = nu;
    ops.lift = lift;
    ops.basis_hash = basis.content_hash();
    ops.a_matrix = nu * basis.stiffness_matrix;

    const int N = basis.size();
    const int Q = int(basis.node_weight.size());

    if (N <= dense_tensor_limit) {
        ops.b_tensor.resize(N);
        Eigen::VectorXd d(Q);
        for (int i = 0; i < N; ++i) {
            d = basis.node_weight.array() * basis.rotv.row(i).transpose().array();
            ops.b_tensor[i].noalias() = basis.val1 * d.asDiagonal() * basis.val2.transpose();
            ops.b_tensor[i] -= ops.b_tensor[i].transpose().eval();
        }
    }

    // Strip rule over the lift support (the support always sits below h0).
    const int nstrip = 48;
    const int nx1 = basis.nx1();
    const double width = lift.support();
    const int Qs = nx1 * nstrip;
    ops.strip_x2.resize(Qs);
    ops.strip_weight.resize(Qs);
    ops.strip_w1.resize(Qs);
    ops.strip_rotw.resize(Qs);
    ops.strip_val1.resize(N, Qs);
    ops.strip_val2.resize(N, Qs);
    ops.strip_rotv.resize(N, Qs);
    const auto [gx, gw] = detail::gauss_legendre_01(nstrip);
    for (int p = 0; p < nx1; ++p) {
        const double x1 = basis.x1_nodes[p];
        for (int q = 0; q < nstrip; ++q) {
            const int idx = p * nstrip + q;
            const double x2 = width > 0.0 ? width * gx[q] : 0.0;
            ops.strip_x2[idx] = x2;
            ops.strip_weight[idx] = basis.x1_weights[p] * (width > 0.0 ? width * gw[q] : 0.0);
            ops.strip_w1[idx] = lift.value(x2);
            ops.strip_rotw[idx] = -lift.deriv(x2);  // rot w = -dw1/dx2
            for (int i = 0; i < N; ++i) {
                const ModePoint mp = basis.eval_mode(i, x1, x2);
                ops.strip_val1(i, idx) = mp.v1;
                ops.strip_val2(i, idx) = mp.v2;
                ops.strip_rotv(i, idx) = mp.rot;
            }
        }
    }

    // <B(v_i, w), v_k> = int rot v_i * w1 * (v_k)_2  (w2 = 0).
    const Eigen::VectorXd ww = ops.strip_weight.array() * ops.strip_w1.array();
    ops.g_vw.noalias() = ops.strip_rotv * ww.asDiagonal() * ops.strip_val2.transpose();
    // <B(w, v_j), v_k> = int rot w * (v_j1 v_k2 - v_j2 v_k1).
    const Eigen::VectorXd wr = ops.strip_weight.array() * ops.strip_rotw.array();
    ops.g_wv.noalias() = ops.strip_val1 * wr.asDiagonal() * ops.strip_val2.transpose() -
                         ops.strip_val2 * wr.asDiagonal() * ops.strip_val1.transpose();

    // <F, v_k> = nu int rot w rot v_k - <B(w,w), v_k>, the latter being
    // int rot w * w1 * (v_k)_2.
    ops.f_vector = nu * (ops.strip_rotv * wr) -
                   ops.strip_val2 * (wr.array() * ops.strip_w1.array()).matrix();

    ops.stiffness_llt.compute(basis.stiffness_matrix);
    ops.mass_llt.compute(basis.mass_matrix);
    if (ops.stiffness_llt.info() != Eigen::Success || ops.mass_llt.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "operators", "Gram factorization failed");
    ops.f_dual_norm = ops.dual_norm(ops.f_vector);
    return ops;
}

double dual_norm(const Eigen::VectorXd& load, const DivFreeBasis& basis) {
    Eigen::LLT<Eigen::MatrixXd> llt(basis.stiffness_matrix);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "operators", "stiffness factorization failed");
    return std::sqrt(std::max(0.0, load.dot(llt.solve(load))));
}

LiftBoundReport lift_bound_check(const DivFreeBasis& basis, const OperatorSet& ops, int draws,
                                 std::uint64_t seed) {
    LiftBoundReport report;
    report.lambda = ops.lift.lambda;
    report.draws = draws;

    const Eigen::MatrixXd sym = 0.5 * (ops.g_vw + ops.g_vw.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        sym, basis.stiffness_matrix, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "operators", "lift-bound eigensolver failed");
    report.spectral_radius =
        std::max(std::abs(ges.eigenvalues().minCoeff()), std::abs(ges.eigenvalues().maxCoeff()));

    auto rng = make_rng(seed, "lift-bound");
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int d = 0; d < draws; ++d) {
        Eigen::VectorXd a(basis.size());
        for (int i = 0; i < basis.size(); ++i) a[i] = normal(rng);
        const double form = std::abs(a.dot(ops.g_vw * a));
        const double vv = a.dot(basis.stiffness_matrix * a);
        const double ratio = form / vv;
        report.max_ratio = std::max(report.max_ratio, ratio);
        if (ratio > ops.lift.lambda) ++report.violations;
    }
    report.passed = report.violations == 0 && report.spectral_radius <= ops.lift.lambda;
    return report;
}

BoundaryIdentityReport boundary_identity_check(const DivFreeBasis& basis, const OperatorSet& ops,
                                               int samples, std::uint64_t seed) {
    BoundaryIdentityReport report;
    report.samples = samples;
    auto rng = make_rng(seed, "boundary-identity");
    std::normal_distribution<double> normal(0.0, 1.0);
    const int N = basis.size();

    const auto advect = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& c) {
        // int (u_a . grad) u_b . u_c dx by quadrature of the node tables.
        const Eigen::ArrayXd a1 = (basis.val1.transpose() * a).array();
        const Eigen::ArrayXd a2 = (basis.val2.transpose() * a).array();
        const Eigen::ArrayXd b11 = (basis.g11.transpose() * b).array();
        const Eigen::ArrayXd b12 = (basis.g12.transpose() * b).array();
        const Eigen::ArrayXd b21 = (basis.g21.transpose() * b).array();
        const Eigen::ArrayXd b22 = (basis.g22.transpose() * b).array();
        const Eigen::ArrayXd c1 = (basis.val1.transpose() * c).array();
        const Eigen::ArrayXd c2 = (basis.val2.transpose() * c).array();
        return (basis.node_weight.array() *
                ((a1 * b11 + a2 * b12) * c1 + (a1 * b21 + a2 * b22) * c2))
            .sum();
    };

    for (int it = 0; it < samples; ++it) {
        Eigen::VectorXd v(N), z(N);
        for (int i = 0; i < N; ++i) v[i] = normal(rng);
        for (int i = 0; i < N; ++i) z[i] = normal(rng);
        v /= basis.v_norm(v);
        z /= basis.v_norm(z);

        const double lhs = ops.convection(basis, v).dot(z);
        const double zv_v = advect(z, v, v);
        const double vz_v = advect(v, z, v);
        const Eigen::VectorXd vn = basis.normal_trace(v);
        const Eigen::VectorXd zn = basis.normal_trace(z);
        const double surf =
            0.5 * (basis.boundary_weights.array() * vn.array().square() * zn.array()).sum();

        report.max_interior_residual =
            std::max(report.max_interior_residual, std::abs(lhs - (zv_v - vz_v)));
        report.max_boundary_residual =
            std::max(report.max_boundary_residual, std::abs(lhs - (surf - vz_v)));

        // z = v: the form vanishes and the boundary identity reduces to
        // (v.grad)v.v = 1/2 int vN^3.
        const double self = ops.convection(basis, v).dot(v);
        const double surf_v =
            0.5 * (basis.boundary_weights.array() * vn.array().cube()).sum();
        const double vv_v = advect(v, v, v);
        report.max_vv_residual = std::max(
            report.max_vv_residual, std::max(std::abs(self), std::abs(surf_v - vv_v)));
    }
    return report;
}

double g_operator_norm(const DivFreeBasis& basis, const OperatorSet& ops) {
    const Eigen::MatrixXd gsum = (ops.g_vw + ops.g_wv).transpose();
    const Eigen::MatrixXd l = Eigen::MatrixXd(ops.stiffness_llt.matrixL());
    // Operator V -> V*: largest singular value of L^-1 G L^-T.
    const Eigen::MatrixXd m =
        l.triangularView<Eigen::Lower>().solve(
            l.triangularView<Eigen::Lower>().solve(gsum.transpose()).transpose());
    return m.jacobiSvd().singularValues()[0];
}

}  // namespace shearflow
