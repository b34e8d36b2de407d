#ifndef SHEARFLOW_ATTRACTOR_HPP
#define SHEARFLOW_ATTRACTOR_HPP

#include <vector>

#include "shearflow/simulate.hpp"

namespace shearflow {

/// Norms of one unit time window [h, h+1]:
///   l2V      = ||v||_{L2(h,h+1;V)}        (trapezoid over samples)
///   linfH    = ||v||_{Linf(h,h+1;H)}      (max over samples)
///   l43dual  = ||v'||_{L4/3(h,h+1;V*)}    (trapezoid, residual channel)
/// f_norm is their sum, the window F(0,1)-norm.
struct WindowNorms {
    double h = 0.0;
    double l2V = 0.0;
    double linfH = 0.0;
    double l43dual = 0.0;
    double f_norm = 0.0;
};

/// Shift semigroup (T(t)v)(s) = v(s+t), t snapped to the sample grid.
/// Throws ShiftBeyondHorizon when t exceeds the horizon.
Trajectory shift(const Trajectory& traj, double t);

/// Throws WindowBeyondHorizon when h+1 exceeds the horizon.
WindowNorms window_norms(const Trajectory& traj, double h);

/// sup over the window grid h in {0, stride, 2 stride, ...} of the window
/// f_norm; stride defaults to 10 samples. Throws HorizonTooShort if the
/// horizon is below 1.
double fb_norm(const Trajectory& traj, double stride = 0.0);

struct GronwallReport {
    bool holds = false;
    double max_excess_rel = 0.0;  ///< max (||v(t)||_H^2 - envelope)/envelope
    double m0 = 0.0;              ///< ||v||_{Linf(0,1;H)}
    double radius = 0.0;          ///< audited Gronwall ball radius
    double kappa = 0.0;           ///< entry threshold factor
    double entry_time = -1.0;     ///< first sample time staying inside kappa * radius
    double predicted_entry = 0.0;  ///< envelope crossing of the same threshold
};

/// Pointwise check of ||v(t)||_H^2 <= exp(C1 lambda1 (1-t)) M0^2
///                                    + C2(1+||F||^2)/(C1 lambda1)
/// along the trajectory, plus first-entry time into the ball of radius
/// kappa * gronwall_radius. kappa = sqrt(2) makes the predicted crossing
/// 1 + log(M0^2/R1)/(C1 lambda1).
GronwallReport gronwall_check(const Trajectory& traj, const ConstantsAudit& audit,
                              double kappa = 1.4142135623730951);

struct WindowEnvelopeReport {
    int windows = 0;
    int violations_first = 0;   ///< of l2V^2 + linfH^2 <= C4 + C5 M0^2 e^(-C6 h)
    int violations_second = 0;  ///< of l43dual^(4/3) <= C7 + C8 M0^(8/3) e^(-C9 h)
    double max_ratio_first = 0.0;
    double max_ratio_second = 0.0;
};

/// Lemma-4.1 window envelopes on the full window grid with audited constants.
WindowEnvelopeReport window_envelope_check(const Trajectory& traj, const ConstantsAudit& audit,
                                           double stride = 0.0);

struct AbsorbingReport {
    double fb0 = 0.0;       ///< fb_norm of the unshifted trajectory
    double s0 = 0.0;        ///< (1/delta) log(Cabs fb0^beta / R0), clamped at 0
    int shifts_checked = 0;
    int violations = 0;     ///< fb_norm(shift(v,s)) > 2 R0 for grid s >= s0
    double max_fb_shifted = 0.0;
};

/// Absorbing-set surrogate: fb_norm(T(s) v) <= 2 R0 for all grid shifts
/// s >= s0, with s0 from the audited (R0, Cabs, beta, delta).
AbsorbingReport absorbing_check(const Trajectory& traj, const ConstantsAudit& audit,
                                double stride = 0.0);

struct AttractorReport {
    double fb_norm = 0.0;           ///< of the first ensemble member
    double gronwall_radius = 0.0;
    double r0 = 0.0, cabs = 0.0, beta = 0.0, delta = 0.0;
    std::vector<double> entry_times;
    std::vector<Eigen::VectorXd> section_cloud;
    std::vector<double> cloud_norm_h, cloud_norm_v;
    double cloud_h_radius = 0.0;
    double cloud_v_radius = 0.0;
    double inside_fraction = 0.0;  ///< of cloud points within (1+tol) radius
    double tol = 0.0;
    bool t_section_after_entry = true;
};

/// Runs `count` trajectories from seeded random H-ball data, samples
/// v(t_section + k delta) into the section cloud and reports its radii and
/// the fraction inside the (1+tol) Gronwall ball.
AttractorReport ensemble_sections(const FlowParameters& params, const DivFreeBasis& basis,
                                  const OperatorSet& ops, const ConstantsAudit& audit, int count,
                                  double t_section, double delta, int samples_per_traj,
                                  double tol = 1e-2);

}  // namespace shearflow

#endif
