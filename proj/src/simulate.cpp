#include "shearflow/simulate.hpp"

#include <cmath>

#include "shearflow/error.hpp"
#include "shearflow/rng.hpp"

namespace shearflow {

Eigen::VectorXd make_initial_coefficients(const DivFreeBasis& basis, const InitialCondition& ic) {
    const int N = basis.size();
    switch (ic.kind) {
        case InitialCondition::Kind::Zero:
            return Eigen::VectorXd::Zero(N);
        case InitialCondition::Kind::Eigenmode: {
            if (ic.mode < 0 || ic.mode >= N)
                throw Error(ErrorCode::ConfigType, "simulate", "eigenmode index out of range",
                            std::to_string(ic.mode));
            return ic.amp * basis.stokes_vectors.col(ic.mode);
        }
        case InitialCondition::Kind::RandomHBall: {
            // Gaussian coefficients in the Stokes eigenbasis with the decaying
            // spectrum mu_k^(-p/2), rescaled to the requested H-norm. The
            // eigenvectors are mass-orthonormal, so ||v||_H = |c|_2.
            auto rng = make_rng(ic.seed, "random-h-ball", ic.stream);
            std::normal_distribution<double> normal(0.0, 1.0);
            Eigen::VectorXd c(N);
            const double mu1 = basis.stokes_values[0];
            for (int k = 0; k < N; ++k)
                c[k] = normal(rng) *
                       std::pow(basis.stokes_values[k] / mu1, -0.5 * ic.spectrum_decay);
            const double norm = c.norm();
            if (norm == 0.0) return Eigen::VectorXd::Zero(N);
            c *= ic.radius / norm;
            return basis.stokes_vectors * c;
        }
    }
    throw Error(ErrorCode::ConfigType, "simulate", "unknown initial condition kind");
}

TimeStepper::TimeStepper(const DivFreeBasis& basis, const OperatorSet& ops,
                         const MollifiedPotential* jn, double dt, bool convection_enabled,
                         bool boundary_enabled)
    : basis_(basis), ops_(ops), jn_(jn), dt_(dt), convection_(convection_enabled),
      boundary_(boundary_enabled && jn != nullptr) {
    if (!(dt > 0.0))
        throw Error(ErrorCode::ConfigType, "simulate", "dt must be positive", std::to_string(dt));
    solver_.compute(basis.mass_matrix + 0.5 * dt * ops.a_matrix);
    if (solver_.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "simulate", "implicit solve factorization failed");
    rhs_matrix_ = basis.mass_matrix - 0.5 * dt * ops.a_matrix;
}

Eigen::VectorXd TimeStepper::boundary_load(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd vn = basis_.normal_trace(a);
    Eigen::VectorXd xi(vn.size());
    for (int p = 0; p < vn.size(); ++p) xi[p] = jn_->deriv_fast(vn[p]);
    return basis_.trace_normal.transpose() *
           (basis_.boundary_weights.array() * xi.array()).matrix();
}

Eigen::VectorXd TimeStepper::explicit_load(const Eigen::VectorXd& a) const {
    Eigen::VectorXd load = ops_.f_vector + ops_.g_apply(a);
    if (convection_) load -= ops_.convection(basis_, a);
    if (boundary_) load -= boundary_load(a);
    return load;
}

Eigen::VectorXd TimeStepper::residual(const Eigen::VectorXd& a) const {
    return explicit_load(a) - ops_.a_matrix * a;
}

GalerkinState TimeStepper::step(const GalerkinState& state) const {
    if (!state.a.allFinite())
        throw Error(ErrorCode::NonFiniteState, "simulate", "state is not finite",
                    "t=" + std::to_string(state.t));
    GalerkinState next;
    next.t = state.t + dt_;
    next.a = solver_.solve(rhs_matrix_ * state.a + dt_ * explicit_load(state.a));
    return next;
}

Trajectory run(const FlowParameters& params, const DivFreeBasis& basis, const OperatorSet& ops,
               const ConstantsAudit& audit, const CheckpointSink& checkpoint_sink) {
    MollifiedPotential jn = mollify(params.potential, params.n_mollify);
    // Hot-path derivative table over the inner part of the certified range;
    // excursions fall back to direct quadrature and are flagged.
    const double table_half = std::min(8.0, std::max(std::abs(params.scan.lo), params.scan.hi));
    jn.build_table(-table_half, table_half, 32769);

    TimeStepper stepper(basis, ops, params.boundary_enabled ? &jn : nullptr, params.dt,
                        params.convection_enabled, params.boundary_enabled);

    const long n_steps = std::lround(params.t_end / params.dt);
    const int stride = std::max(1, params.sample_stride);

    Trajectory traj;
    traj.dt = params.dt * stride;

    GalerkinState state;
    state.t = 0.0;
    state.a = make_initial_coefficients(basis, params.v0);

    const double guard = params.blowup_factor * std::max(audit.gronwall_radius, 1e-12);
    const double c2k = audit.C2 * (1.0 + audit.f_dual_norm * audit.f_dual_norm);

    double prev_h2 = 0.0;
    const auto record = [&](const GalerkinState& st, bool first) {
        const double hn = basis.h_norm(st.a);
        const double vn = basis.v_norm(st.a);
        traj.time.push_back(st.t);
        traj.coeffs.push_back(st.a);
        traj.norm_h.push_back(hn);
        traj.norm_v.push_back(vn);
        traj.vprime_dual.push_back(ops.dual_norm(stepper.residual(st.a)));
        const Eigen::VectorXd bt = basis.normal_trace(st.a);
        traj.boundary_vn.push_back(bt);
        const double max_vn = bt.size() ? bt.cwiseAbs().maxCoeff() : 0.0;
        traj.max_abs_vn = std::max(traj.max_abs_vn, max_vn);
        if (max_vn > std::max(std::abs(params.scan.lo), params.scan.hi))
            traj.vn_left_scan_range = true;
        if (first) {
            traj.energy_slack.push_back(0.0);
        } else {
            const double h2 = hn * hn;
            traj.energy_slack.push_back((h2 - prev_h2) / (2.0 * traj.dt) + audit.C1 * vn * vn -
                                        c2k);
        }
        prev_h2 = hn * hn;
    };

    record(state, true);
    for (long k = 0; k < n_steps; ++k) {
        state = stepper.step(state);
        const double hn = basis.h_norm(state.a);
        if (!std::isfinite(hn) || hn > guard)
            throw Error(ErrorCode::NonFiniteState, "simulate",
                        "blow-up guard tripped (misconfiguration: the estimates forbid growth)",
                        "step=" + std::to_string(k + 1) + " |v|_H=" + std::to_string(hn));
        if ((k + 1) % stride == 0) record(state, false);
        if (checkpoint_sink && params.checkpoint_every > 0 &&
            (k + 1) % params.checkpoint_every == 0)
            checkpoint_sink(k + 1, state.a);
    }
    return traj;
}

EnergyReport energy_monitor(const Trajectory& traj, const ConstantsAudit& audit,
                            double tol_coeff) {
    EnergyReport report;
    report.tol_coeff = tol_coeff;
    const double c2k = audit.C2 * (1.0 + audit.f_dual_norm * audit.f_dual_norm);
    for (int i = 1; i < traj.samples(); ++i) {
        const double h2 = traj.norm_h[i] * traj.norm_h[i];
        const double h2p = traj.norm_h[i - 1] * traj.norm_h[i - 1];
        const double v2 = traj.norm_v[i] * traj.norm_v[i];
        const double sigma = (h2 - h2p) / (2.0 * traj.dt) + audit.C1 * v2 - c2k;
        const double tol = tol_coeff * traj.dt * std::max(1.0, v2);
        ++report.steps;
        report.max_slack = std::max(report.max_slack, sigma);
        report.max_excess = std::max(report.max_excess, sigma - tol);
        if (sigma > tol) ++report.violations;
        report.integrated_slack += traj.dt * sigma;
        report.integrated_tol += traj.dt * tol;
    }
    return report;
}

VPrimeReport vprime_monitor(const Trajectory& traj, const ConstantsAudit& audit) {
    VPrimeReport report;
    for (int i = 0; i < traj.samples(); ++i) {
        const double v = traj.norm_v[i];
        const double h = traj.norm_h[i];
        const double rhs = audit.C3 * (1.0 + v + std::sqrt(h) * std::pow(v, 1.5));
        ++report.samples;
        const double ratio = traj.vprime_dual[i] / rhs;
        report.max_ratio = std::max(report.max_ratio, ratio);
        if (ratio > 1.0) ++report.violations;
    }
    return report;
}

SelectionReport selection_check(const Trajectory& traj, const MollifiedPotential& jn,
                                int sample_stride, double tol) {
    SelectionReport report;
    const double radius = 1.0 / double(jn.n);
    for (int i = 0; i < traj.samples(); i += std::max(1, sample_stride)) {
        const Eigen::VectorXd& vn = traj.boundary_vn[i];
        for (int p = 0; p < vn.size(); ++p) {
            const double xi = jn.deriv_fast(vn[p]);
            const ClarkeInterval hull = jn.base.derivative_hull(vn[p] - radius, vn[p] + radius);
            ++report.checked;
            const double defect =
                std::max({0.0, hull.lo - xi, xi - hull.hi});
            report.max_defect = std::max(report.max_defect, defect);
            if (defect > tol) ++report.violations;
        }
    }
    return report;
}

double measure_ladyzhenskaya(const DivFreeBasis& basis, int draws, std::uint64_t seed,
                             double safety) {
    auto rng = make_rng(seed, "ladyzhenskaya");
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    const auto ratio = [&](const Eigen::VectorXd& a) {
        const double l4 = basis.l4_norm(a);
        const double h = basis.h_norm(a);
        const double v = basis.v_norm(a);
        if (h <= 0.0 || v <= 0.0) return 0.0;
        return l4 / (std::sqrt(h) * std::sqrt(v));
    };
    for (int k = 0; k < basis.size(); ++k) worst = std::max(worst, ratio(basis.stokes_vectors.col(k)));
    for (int d = 0; d < draws; ++d) {
        Eigen::VectorXd a(basis.size());
        for (int i = 0; i < basis.size(); ++i) a[i] = normal(rng);
        worst = std::max(worst, ratio(a));
        // Boundary-heavy draws stress the trace-carrying profiles.
        Eigen::VectorXd b = a;
        for (int i = 0; i < basis.size(); ++i)
            if (basis.modes[i].m != basis.M) b[i] *= 0.1;
        worst = std::max(worst, ratio(b));
    }
    return worst * safety;
}

}  // namespace shearflow
