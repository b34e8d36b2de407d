#ifndef SHEARFLOW_SIMULATE_HPP
#define SHEARFLOW_SIMULATE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "shearflow/constants.hpp"
#include "shearflow/operators.hpp"
#include "shearflow/potential.hpp"

namespace shearflow {

struct InitialCondition {
    enum class Kind { Zero, RandomHBall, Eigenmode };
    Kind kind = Kind::Zero;
    double radius = 1.0;          ///< target ||v0||_H for RandomHBall
    double spectrum_decay = 2.0;  ///< coefficient law mu_k^(-p/2) before scaling
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;  ///< substream index (ensemble member)
    int mode = 0;              ///< Stokes eigenmode index for Eigenmode
    double amp = 1.0;

    static InitialCondition zero() { return {}; }
    static InitialCondition random_h_ball(double r, std::uint64_t seed, std::uint64_t stream = 0,
                                          double decay = 2.0) {
        InitialCondition ic;
        ic.kind = Kind::RandomHBall;
        ic.radius = r;
        ic.seed = seed;
        ic.stream = stream;
        ic.spectrum_decay = decay;
        return ic;
    }
    static InitialCondition eigenmode(int k, double amp) {
        InitialCondition ic;
        ic.kind = Kind::Eigenmode;
        ic.mode = k;
        ic.amp = amp;
        return ic;
    }
};

Eigen::VectorXd make_initial_coefficients(const DivFreeBasis& basis, const InitialCondition& ic);

struct FlowParameters {
    double nu = 1.0;
    double s = 0.0;
    double lambda = 0.2;
    Superpotential potential = Superpotential::quadratic();
    int n_mollify = 32;
    ScanSpec scan;
    double dt = 1e-3;
    double t_end = 1.0;
    InitialCondition v0;
    bool convection_enabled = true;
    bool boundary_enabled = true;
    int sample_stride = 1;
    long checkpoint_every = 0;  ///< steps between checkpoint callbacks, 0 = off
    double blowup_factor = 1e6;
    double energy_tol_coeff = 10.0;  ///< tol(dt) = coeff * dt * max(1, ||v||^2)
};

struct GalerkinState {
    double t = 0.0;
    Eigen::VectorXd a;
};

/// One IMEX step: A integrated by the trapezoidal (Crank-Nicolson) rule --
/// the solve is with (M + dt/2 A) -- while B[v], G(v) and the boundary
/// selection j_n'(v_N) are explicit at the current state.
class TimeStepper {
  public:
    TimeStepper(const DivFreeBasis& basis, const OperatorSet& ops, const MollifiedPotential* jn,
                double dt, bool convection_enabled = true, bool boundary_enabled = true);

    GalerkinState step(const GalerkinState& state) const;

    /// Explicit load F + G(a) - B[a] - boundary(a) (no A part).
    Eigen::VectorXd explicit_load(const Eigen::VectorXd& a) const;
    /// Boundary load (j_n'(v_N), (v_k)_N)_{Gamma0} by trace quadrature.
    Eigen::VectorXd boundary_load(const Eigen::VectorXd& a) const;
    /// Full residual functional F + G(a) - A a - B[a] - boundary(a); its dual
    /// norm is the authoritative ||v'||_{V*} channel.
    Eigen::VectorXd residual(const Eigen::VectorXd& a) const;

    const DivFreeBasis& basis() const { return basis_; }
    const OperatorSet& ops() const { return ops_; }
    double dt() const { return dt_; }

  private:
    const DivFreeBasis& basis_;
    const OperatorSet& ops_;
    const MollifiedPotential* jn_;
    double dt_;
    bool convection_;
    bool boundary_;
    Eigen::LLT<Eigen::MatrixXd> solver_;  // M + dt/2 nu S
    Eigen::MatrixXd rhs_matrix_;          // M - dt/2 nu S
};

/// Sampled trajectory with precomputed norm channels. Samples are uniformly
/// spaced (stride * dt); coefficients are kept so windows, shifts and section
/// clouds can be recomputed.
class Trajectory {
  public:
    double dt = 0.0;  ///< sample spacing
    std::vector<double> time;
    std::vector<Eigen::VectorXd> coeffs;
    std::vector<double> norm_h;
    std::vector<double> norm_v;
    std::vector<double> vprime_dual;   ///< residual-based ||v'||_{V*}
    std::vector<double> energy_slack;  ///< per-step sigma, [0] = 0
    std::vector<Eigen::VectorXd> boundary_vn;

    double shift_offset = 0.0;  ///< accumulated shift metadata
    double max_abs_vn = 0.0;
    bool vn_left_scan_range = false;  ///< |v_N| escaped the certified range

    int samples() const { return int(time.size()); }
    double horizon() const { return time.empty() ? 0.0 : time.back(); }
};

using CheckpointSink = std::function<void(long step, const Eigen::VectorXd& a)>;

/// Integrates to t_end, filling channels and the per-step energy slack.
/// Throws NonFiniteState on blow-up (guarded by blowup_factor times the
/// audited Gronwall radius). checkpoint_sink, when set, fires every
/// checkpoint_every steps.
Trajectory run(const FlowParameters& params, const DivFreeBasis& basis, const OperatorSet& ops,
               const ConstantsAudit& audit, const CheckpointSink& checkpoint_sink = {});

struct EnergyReport {
    int steps = 0;
    int violations = 0;
    double max_slack = 0.0;      ///< max sigma_k
    double max_excess = 0.0;     ///< max (sigma_k - tol_k)
    double tol_coeff = 0.0;
    double integrated_slack = 0.0;  ///< dt * sum sigma_k, the (3.6) surplus
    double integrated_tol = 0.0;
};

/// Recomputes sigma_k = (||v^{k+1}||_H^2 - ||v^k||_H^2)/(2 dt)
///                      + C1 ||v^{k+1}||^2 - C2 (1 + ||F||^2)
/// from the stored channels and counts steps with sigma_k > tol(dt).
EnergyReport energy_monitor(const Trajectory& traj, const ConstantsAudit& audit,
                            double tol_coeff = 10.0);

struct VPrimeReport {
    int samples = 0;
    int violations = 0;
    double max_ratio = 0.0;  ///< max lhs/rhs of the Lemma-3.2 bound
};

/// Checks ||v'||_{V*} <= C3 (1 + ||v|| + ||v||_H^(1/2) ||v||^(3/2)) along the
/// trajectory with the audited C3.
VPrimeReport vprime_monitor(const Trajectory& traj, const ConstantsAudit& audit);

struct SelectionReport {
    int checked = 0;
    int violations = 0;
    double max_defect = 0.0;
};

/// Selection legality: at sampled steps and boundary nodes, the used
/// xi = j_n'(v_N) must lie in the hull of the Clarke intervals of j over
/// [v_N - 1/n, v_N + 1/n].
SelectionReport selection_check(const Trajectory& traj, const MollifiedPotential& jn,
                                int sample_stride = 10, double tol = 1e-6);

/// Sampled discrete Ladyzhenskaya constant sup ||v||_L4 / (||v||_H^(1/2)
/// ||v||^(1/2)) over random draws, eigenmodes and pair combinations,
/// multiplied by a safety factor (recorded in the audit protocol).
double measure_ladyzhenskaya(const DivFreeBasis& basis, int draws, std::uint64_t seed,
                             double safety = 1.25);

}  // namespace shearflow

#endif
