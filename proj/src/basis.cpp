#include "shearflow/basis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "shearflow/detail/gauss.hpp"
#include "shearflow/error.hpp"

namespace shearflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wall-normal seed profiles on eta in [0,1], all with phi(1)=phi'(1)=phi'(0)=0.
// Seeds 0..M-2 are eta^(j+2) (1-eta)^2 (vanish at the bottom wall); the last
// seed (1-eta)^2 (1+2 eta) carries the nonzero wall value phi(0)=1. Factored
// evaluation keeps the boundary conditions exact in floating point.
struct Seed {
    int m;  // power for the vanishing family; m == 0 marks the wall-leak seed

    double value(double eta) const {
        const double one = 1.0 - eta;
        if (m == 0) return one * one * (1.0 + 2.0 * eta);
        return std::pow(eta, m) * one * one;
    }
    double deriv(double eta) const {
        if (m == 0) return -6.0 * eta * (1.0 - eta);
        return std::pow(eta, m - 1) * (double(m) - 2.0 * double(m + 1) * eta + double(m + 2) * eta * eta);
    }
    double deriv2(double eta) const {
        if (m == 0) return -6.0 + 12.0 * eta;
        const double a = double(m) * double(m - 1);
        const double b = 2.0 * double(m + 1) * double(m);
        const double c = double(m + 2) * double(m + 1);
        return std::pow(eta, m - 2) * (a - b * eta + c * eta * eta);
    }
    // Monomial coefficients (exact small integers), for the L2 Gram.
    Eigen::VectorXd monomials(int ncoef) const {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(ncoef);
        if (m == 0) {
            c[0] = 1.0;
            c[2] = -3.0;
            c[3] = 2.0;
        } else {
            c[m] = 1.0;
            c[m + 1] = -2.0;
            c[m + 2] = 1.0;
        }
        return c;
    }
};

// Seed j of an M-profile family: the vanishing powers come first, the
// wall-leak seed last.
Seed seed_at(int j, int M) { return (j == M - 1) ? Seed{0} : Seed{j + 2}; }
}  // namespace

double DivFreeBasis::profile_value(int m, double eta) const {
    double v = 0.0;
    for (int j = 0; j < M; ++j) v += profile_coeffs(m - 1, j) * seed_at(j, M).value(eta);
    return v;
}

double DivFreeBasis::profile_deriv(int m, double eta) const {
    double v = 0.0;
    for (int j = 0; j < M; ++j) v += profile_coeffs(m - 1, j) * seed_at(j, M).deriv(eta);
    return v;
}

double DivFreeBasis::profile_deriv2(int m, double eta) const {
    double v = 0.0;
    for (int j = 0; j < M; ++j) v += profile_coeffs(m - 1, j) * seed_at(j, M).deriv2(eta);
    return v;
}

ModePoint DivFreeBasis::eval_mode(int i, double x1, double x2) const {
    const BasisMode& mode = modes[i];
    const double h = geometry.height(x1);
    const double hp = geometry.height_deriv(x1);
    const double hpp = geometry.height_deriv2(x1);
    const double eta = x2 / h;

    const double omega = kTwoPi * double(mode.k) / geometry.L;
    const double theta = omega * x1;
    double tau, dtau, ddtau;  // tau(theta) and derivatives in theta
    if (mode.is_sin) {
        tau = std::sin(theta);
        dtau = std::cos(theta);
        ddtau = -tau;
    } else {
        tau = std::cos(theta);
        dtau = -std::sin(theta);
        ddtau = -tau;
    }

    const double phi = profile_value(mode.m, eta);
    const double dphi = profile_deriv(mode.m, eta);
    const double ddphi = profile_deriv2(mode.m, eta);

    // Chain-rule factors of eta(x1, x2) = x2 / h(x1).
    const double e2 = 1.0 / h;                                   // deta/dx2
    const double e1 = -eta * hp / h;                             // deta/dx1
    const double e11 = eta * (2.0 * hp * hp - h * hpp) / (h * h);  // d2eta/dx1^2
    const double e12 = -hp / (h * h);                            // d2eta/dx1 dx2

    const double psi_x1 = omega * dtau * phi + tau * dphi * e1;
    const double psi_x2 = tau * dphi * e2;
    const double psi_x1x1 = omega * omega * ddtau * phi + 2.0 * omega * dtau * dphi * e1 +
                            tau * (ddphi * e1 * e1 + dphi * e11);
    const double psi_x2x2 = tau * ddphi * e2 * e2;

    ModePoint p;
    p.v1 = psi_x2;
    p.v2 = -psi_x1;
    // g11 from differentiating v1 in x1, g22 from differentiating v2 in x2:
    // algebraically equal and opposite, but computed through separate
    // expressions so the divergence check exercises the code.
    p.g11 = omega * dtau * dphi * e2 + tau * (ddphi * e1 * e2 + dphi * e12);
    p.g12 = psi_x2x2;
    p.g21 = -psi_x1x1;
    p.g22 = -(omega * dtau * dphi * e2 + tau * ddphi * e2 * e1 + tau * dphi * e12);
    p.rot = p.g21 - p.g12;
    return p;
}

double DivFreeBasis::v_norm(const Eigen::VectorXd& a) const {
    return std::sqrt(std::max(0.0, a.dot(stiffness_matrix * a)));
}

double DivFreeBasis::h_norm(const Eigen::VectorXd& a) const {
    return std::sqrt(std::max(0.0, a.dot(mass_matrix * a)));
}

Eigen::VectorXd DivFreeBasis::normal_trace(const Eigen::VectorXd& a) const {
    return trace_normal * a;
}

double DivFreeBasis::l4_norm(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd u1 = val1.transpose() * a;
    const Eigen::VectorXd u2 = val2.transpose() * a;
    const Eigen::ArrayXd sq = u1.array().square() + u2.array().square();
    return std::pow((node_weight.array() * sq.square()).sum(), 0.25);
}

std::uint64_t DivFreeBasis::content_hash() const {
    std::uint64_t h = geometry.content_hash();
    h ^= 0x9e3779b97f4a7c15ULL + std::uint64_t(K) + (h << 6) + (h >> 2);
    h ^= 0x9e3779b97f4a7c15ULL + std::uint64_t(M) + (h << 6) + (h >> 2);
    h ^= 0x9e3779b97f4a7c15ULL + std::uint64_t(nx1()) + (h << 6) + (h >> 2);
    h ^= 0x9e3779b97f4a7c15ULL + std::uint64_t(nx2()) + (h << 6) + (h >> 2);
    return h;
}

DivFreeBasis build_basis(const ChannelGeometry& geom, int K, int M) {
    if (K < 0 || M < 1)
        throw Error(ErrorCode::SingularGram, "geometry", "need K >= 0 and M >= 1",
                    "K=" + std::to_string(K) + " M=" + std::to_string(M));

    DivFreeBasis basis;
    basis.geometry = geom;
    basis.K = K;
    basis.M = M;

    // Orthonormalize the seed profiles in L2(0,1) through the exact monomial
    // Gram; linear combinations preserve the three boundary constraints.
    const int ncoef = M + 3;
    Eigen::MatrixXd mono(M, ncoef);
    for (int j = 0; j < M; ++j) mono.row(j) = seed_at(j, M).monomials(ncoef).transpose();
    Eigen::MatrixXd hilbert(ncoef, ncoef);
    for (int p = 0; p < ncoef; ++p)
        for (int q = 0; q < ncoef; ++q) hilbert(p, q) = 1.0 / double(p + q + 1);
    const Eigen::MatrixXd gram = mono * hilbert * mono.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::SingularGram, "geometry",
                    "profile family is numerically dependent", "M=" + std::to_string(M));
    // Rows of profile_coeffs express phi_m in the seed family.
    basis.profile_coeffs =
        llt.matrixL().solve(Eigen::MatrixXd::Identity(M, M));

    for (int k = 0; k <= K; ++k)
        for (int trig = 0; trig < (k == 0 ? 1 : 2); ++trig)
            for (int m = 1; m <= M; ++m) basis.modes.push_back(BasisMode{k, trig == 1, m});
    const int N = basis.size();

    // Quadrature: trapezoid in x1 (exact once nodes exceed the trilinear
    // harmonic content 3K for constant h, spectrally accurate otherwise),
    // Gauss-Legendre in eta sized for triple products of degree 3(M+2).
    int nx1 = geom.quadrature.nx1;
    int nx2 = geom.quadrature.nx2;
    if (nx1 <= 0) nx1 = std::max(geom.h.is_constant() ? 16 : 64, 6 * K + 4);
    if (nx2 <= 0) nx2 = std::max(10, (3 * (M + 2) + 3) / 2 + 1);

    basis.x1_nodes.resize(nx1);
    basis.x1_weights.setConstant(nx1, geom.L / double(nx1));
    for (int p = 0; p < nx1; ++p) basis.x1_nodes[p] = geom.L * double(p) / double(nx1);

    const auto [gx, gw] = detail::gauss_legendre_01(nx2);
    basis.eta_nodes = Eigen::Map<const Eigen::VectorXd>(gx.data(), nx2);
    basis.eta_weights = Eigen::Map<const Eigen::VectorXd>(gw.data(), nx2);

    const int Q = nx1 * nx2;
    basis.node_x1.resize(Q);
    basis.node_x2.resize(Q);
    basis.node_weight.resize(Q);
    for (int p = 0; p < nx1; ++p) {
        const double x1 = basis.x1_nodes[p];
        const double h = geom.height(x1);
        for (int q = 0; q < nx2; ++q) {
            const int idx = p * nx2 + q;
            basis.node_x1[idx] = x1;
            basis.node_x2[idx] = basis.eta_nodes[q] * h;
            basis.node_weight[idx] = basis.x1_weights[p] * basis.eta_weights[q] * h;
        }
    }

    basis.val1.resize(N, Q);
    basis.val2.resize(N, Q);
    basis.rotv.resize(N, Q);
    basis.g11.resize(N, Q);
    basis.g12.resize(N, Q);
    basis.g21.resize(N, Q);
    basis.g22.resize(N, Q);
    for (int i = 0; i < N; ++i) {
        for (int idx = 0; idx < Q; ++idx) {
            const ModePoint p = basis.eval_mode(i, basis.node_x1[idx], basis.node_x2[idx]);
            basis.val1(i, idx) = p.v1;
            basis.val2(i, idx) = p.v2;
            basis.rotv(i, idx) = p.rot;
            basis.g11(i, idx) = p.g11;
            basis.g12(i, idx) = p.g12;
            basis.g21(i, idx) = p.g21;
            basis.g22(i, idx) = p.g22;
        }
    }

    const auto weighted_gram = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return Eigen::MatrixXd(a * basis.node_weight.asDiagonal() * b.transpose());
    };
    basis.mass_matrix = weighted_gram(basis.val1, basis.val1) + weighted_gram(basis.val2, basis.val2);
    basis.stiffness_matrix = weighted_gram(basis.g11, basis.g11) + weighted_gram(basis.g12, basis.g12) +
                             weighted_gram(basis.g21, basis.g21) + weighted_gram(basis.g22, basis.g22);
    basis.rotrot_matrix = weighted_gram(basis.rotv, basis.rotv);
    // Exact symmetrization: the quadrature sums for (i,j) and (j,i) differ
    // only by summation order.
    basis.mass_matrix = 0.5 * (basis.mass_matrix + basis.mass_matrix.transpose()).eval();
    basis.stiffness_matrix = 0.5 * (basis.stiffness_matrix + basis.stiffness_matrix.transpose()).eval();
    basis.rotrot_matrix = 0.5 * (basis.rotrot_matrix + basis.rotrot_matrix.transpose()).eval();

    basis.boundary_weights.setConstant(nx1, geom.L / double(nx1));
    basis.trace_normal.resize(nx1, N);
    Eigen::MatrixXd trace_tangent(nx1, N);
    for (int p = 0; p < nx1; ++p) {
        for (int i = 0; i < N; ++i) {
            const ModePoint mp = basis.eval_mode(i, basis.x1_nodes[p], 0.0);
            basis.trace_normal(p, i) = -mp.v2;  // n = (0,-1) on the bottom wall
            trace_tangent(p, i) = mp.v1;
        }
    }
    basis.boundary_gram =
        basis.trace_normal.transpose() * basis.boundary_weights.asDiagonal() * basis.trace_normal +
        trace_tangent.transpose() * basis.boundary_weights.asDiagonal() * trace_tangent;
    basis.boundary_gram = 0.5 * (basis.boundary_gram + basis.boundary_gram.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> mass_llt(basis.mass_matrix);
    Eigen::LLT<Eigen::MatrixXd> stiff_llt(basis.stiffness_matrix);
    if (mass_llt.info() != Eigen::Success || stiff_llt.info() != Eigen::Success)
        throw Error(ErrorCode::SingularGram, "geometry",
                    "mass or stiffness matrix is not positive definite",
                    "K=" + std::to_string(K) + " M=" + std::to_string(M));

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        basis.stiffness_matrix, basis.mass_matrix, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "geometry", "generalized eigensolver failed");
    basis.stokes_values = ges.eigenvalues();
    basis.stokes_vectors = ges.eigenvectors();
    if (basis.stokes_values[0] <= 0.0)
        throw Error(ErrorCode::SingularGram, "geometry", "nonpositive Stokes eigenvalue",
                    std::to_string(basis.stokes_values[0]));

    return basis;
}

double trace_norm(const DivFreeBasis& basis) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        basis.boundary_gram, basis.stiffness_matrix, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "geometry", "trace-norm eigensolver failed");
    return std::sqrt(std::max(0.0, ges.eigenvalues().maxCoeff()));
}

double poincare_lambda1(const DivFreeBasis& basis) {
    return basis.stokes_values[0];
}

}  // namespace shearflow
