#ifndef SHEARFLOW_OPERATORS_HPP
#define SHEARFLOW_OPERATORS_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "shearflow/basis.hpp"

namespace shearflow {

/// Divergence-free background field w = (s rho(x2), 0) carrying the wall
/// slide speed: w = 0 on Gamma1, w_T = (s,0) and w_N = 0 on Gamma0, and
/// |<B(v,w), v>| <= lambda ||v||^2 on the span (checked, not assumed).
/// rho is a smooth bump with rho(0)=1, rho'(0)=0, supported inside
/// [0, alpha t0) with t0 = min{lambda/(2|s|), h0, 1}; alpha in (0,1] narrows
/// the support to give the bound a margin.
class LiftField {
  public:
    double s = 0.0;
    double lambda = 0.0;
    double t0 = 0.0;
    double alpha = 1.0;
    double h0 = 0.0;
    std::uint64_t geometry_hash = 0;

    double support() const { return h0 * alpha * t0; }  ///< physical width in x2
    double value(double x2) const;   ///< w1(x2); the second component is 0
    double deriv(double x2) const;   ///< dw1/dx2 = -rot w
    double deriv2(double x2) const;
};

LiftField build_lift(double s, double lambda, const ChannelGeometry& geom, double alpha = 1.0);

/// All weak-form arrays over a basis: A = nu * stiffness, the convection
/// tensor T[i](j,k) = <B(v_i, v_j), v_k>, the lift couplings, the load F and
/// its V*-norm. Immutable after assembly.
class OperatorSet {
  public:
    double nu = 0.0;
    LiftField lift;
    std::uint64_t basis_hash = 0;

    Eigen::MatrixXd a_matrix;                ///< nu * stiffness
    std::vector<Eigen::MatrixXd> b_tensor;   ///< empty when size exceeds the dense threshold
    Eigen::MatrixXd g_vw;                    ///< (i,k) = <B(v_i, w), v_k>
    Eigen::MatrixXd g_wv;                    ///< (i,k) = <B(w, v_i), v_k>
    Eigen::VectorXd f_vector;                ///< <F, v_k>
    double f_dual_norm = 0.0;

    // Lift-coupled integrands live in the thin support strip 0 < x2 < alpha t0
    // h0, far below the resolution of the channel rule, so F and the G
    // matrices are assembled on a dedicated x1 x strip Gauss rule.
    Eigen::VectorXd strip_x2, strip_weight;  ///< flattened nx1 x nstrip nodes
    Eigen::VectorXd strip_w1, strip_rotw;    ///< lift values at strip nodes
    Eigen::MatrixXd strip_val1, strip_val2, strip_rotv;  ///< mode tables, N x Qs

    Eigen::LLT<Eigen::MatrixXd> stiffness_llt;
    Eigen::LLT<Eigen::MatrixXd> mass_llt;

    bool has_tensor() const { return !b_tensor.empty(); }

    /// <B[v_a], v_k> for all k; dense contraction when the tensor is stored,
    /// otherwise on-the-fly quadrature (same rule, results match to 1e-12).
    Eigen::VectorXd convection(const DivFreeBasis& basis, const Eigen::VectorXd& a) const;
    Eigen::VectorXd convection_quadrature(const DivFreeBasis& basis, const Eigen::VectorXd& a) const;

    /// <G(v_a), v_k> = -<B(v_a, w) + B(w, v_a), v_k>.
    Eigen::VectorXd g_apply(const Eigen::VectorXd& a) const;

    /// sqrt(load' S^-1 load): V*-norm through the discrete Riesz map.
    double dual_norm(const Eigen::VectorXd& load) const;
};

/// Dense-tensor storage is skipped above this basis size (memory bound);
/// convection then always goes through quadrature contraction.
OperatorSet assemble_operators(const DivFreeBasis& basis, double nu, const LiftField& lift,
                               int dense_tensor_limit = 160);

double dual_norm(const Eigen::VectorXd& load, const DivFreeBasis& basis);

struct LiftBoundReport {
    double lambda = 0.0;
    double spectral_radius = 0.0;  ///< of sym <B(.,w),.> in the V-norm
    double max_ratio = 0.0;        ///< worst |<B(v,w),v>| / ||v||^2 over draws
    int draws = 0;
    int violations = 0;
    bool passed = false;
};

/// Lemma-level check of |<B(v,w),v>| <= lambda ||v||^2: exact on the span via
/// generalized eigenvalues, plus randomized draws.
LiftBoundReport lift_bound_check(const DivFreeBasis& basis, const OperatorSet& ops, int draws,
                                 std::uint64_t seed);

struct BoundaryIdentityReport {
    int samples = 0;
    double max_interior_residual = 0.0;  ///< <B[v],z> vs (z.grad)v.v - (v.grad)z.v
    double max_boundary_residual = 0.0;  ///< <B[v],z> vs 1/2 int vN^2 zN - (v.grad)z.v
    double max_vv_residual = 0.0;        ///< z = v case
};

/// Verifies the convection identities on random normalized span elements by
/// independent quadrature of each side.
BoundaryIdentityReport boundary_identity_check(const DivFreeBasis& basis, const OperatorSet& ops,
                                               int samples, std::uint64_t seed);

/// Discrete operator norm of a -> -(B(v_a,w)+B(w,v_a)) from V to V*.
double g_operator_norm(const DivFreeBasis& basis, const OperatorSet& ops);

}  // namespace shearflow

#endif
