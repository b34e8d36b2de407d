#ifndef SHEARFLOW_BASIS_HPP
#define SHEARFLOW_BASIS_HPP

#include <Eigen/Dense>
#include <vector>

#include "shearflow/geometry.hpp"

namespace shearflow {

/// Velocity field data of one mode at one point.
struct ModePoint {
    double v1 = 0, v2 = 0;
    double rot = 0;                          ///< dv2/dx1 - dv1/dx2 (scalar 2D rot)
    double g11 = 0, g12 = 0, g21 = 0, g22 = 0;  ///< gij = dvi/dxj
    double div() const { return g11 + g22; }
};

/// One stream-function mode psi_{k,m} = tau_k(2 pi k x1 / L) * phi_m(eta),
/// eta = x2/h(x1); velocity v = (dpsi/dx2, -dpsi/dx1).
struct BasisMode {
    int k = 0;          ///< Fourier wavenumber in x1
    bool is_sin = false;  ///< tau = sin if true, cos otherwise (k=0 keeps only cos)
    int m = 0;          ///< wall-normal profile index, 1-based
};

/// Finite divergence-free Galerkin space with its discrete linear algebra:
/// mass (H inner product), stiffness (V inner product, gradient form),
/// rot-rot Gram, normal-trace sampling on Gamma0, and the generalized
/// (stiffness, mass) eigenpairs playing the role of discrete Stokes modes.
///
/// Immutable after build_basis; safe to share across threads.
class DivFreeBasis {
  public:
    ChannelGeometry geometry;
    int K = 0;
    int M = 0;
    std::vector<BasisMode> modes;

    /// Wall-normal profiles phi_m as monomial coefficients in eta (row m-1),
    /// L2(0,1)-orthonormalized under phi(1)=phi'(1)=phi'(0)=0.
    Eigen::MatrixXd profile_coeffs;

    // Quadrature tables. Interior nodes are the tensor grid (x1_p, eta_q h(x1_p))
    // flattened with p outer; node_weight includes the h(x1) Jacobian.
    Eigen::VectorXd x1_nodes, x1_weights;
    Eigen::VectorXd eta_nodes, eta_weights;
    Eigen::VectorXd node_x1, node_x2, node_weight;

    // Per-mode field values at interior quadrature nodes, N x Q.
    Eigen::MatrixXd val1, val2, rotv, g11, g12, g21, g22;

    Eigen::MatrixXd mass_matrix;
    Eigen::MatrixXd stiffness_matrix;
    Eigen::MatrixXd rotrot_matrix;

    /// v_N = v . n (n = (0,-1) on Gamma0) of each mode at the boundary nodes.
    Eigen::MatrixXd trace_normal;    ///< nx1 x N
    Eigen::VectorXd boundary_weights;  ///< nx1, each L/nx1
    Eigen::MatrixXd boundary_gram;   ///< full vector-trace Gram on Gamma0

    Eigen::VectorXd stokes_values;   ///< ascending generalized eigenvalues
    Eigen::MatrixXd stokes_vectors;  ///< columns, mass-orthonormal

    int size() const { return static_cast<int>(modes.size()); }
    int nx1() const { return static_cast<int>(x1_nodes.size()); }
    int nx2() const { return static_cast<int>(eta_nodes.size()); }

    double profile_value(int m, double eta) const;
    double profile_deriv(int m, double eta) const;
    double profile_deriv2(int m, double eta) const;

    /// Analytic evaluation of mode i at an arbitrary interior point.
    ModePoint eval_mode(int i, double x1, double x2) const;

    double v_norm(const Eigen::VectorXd& a) const;  ///< sqrt(a' S a)
    double h_norm(const Eigen::VectorXd& a) const;  ///< sqrt(a' M a)
    Eigen::VectorXd normal_trace(const Eigen::VectorXd& a) const;  ///< trace_normal * a

    /// L4(Omega) norm of the span element with coefficients a (quadrature).
    double l4_norm(const Eigen::VectorXd& a) const;

    std::uint64_t content_hash() const;
};

/// Builds the stream-function basis: (1 + 2K) Fourier components x M profiles.
/// Throws SingularGram if the profile orthonormalization collapses.
DivFreeBasis build_basis(const ChannelGeometry& geom, int K, int M);

/// Discrete norm of the trace operator v -> v|Gamma0 from (span, V-norm) to
/// L2(Gamma0; R^2): sqrt of the largest generalized eigenvalue of
/// (boundary_gram, stiffness).
double trace_norm(const DivFreeBasis& basis);

/// Smallest generalized eigenvalue of (stiffness, mass); the discrete
/// Poincare constant lambda_1 with lambda_1 ||u||_H^2 <= ||u||^2 on the span.
double poincare_lambda1(const DivFreeBasis& basis);

}  // namespace shearflow

#endif
