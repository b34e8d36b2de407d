#include "shearflow/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "shearflow/error.hpp"

namespace shearflow {

namespace {
long index_for(const Trajectory& traj, double t) { return std::lround(t / traj.dt); }
}  // namespace

Trajectory shift(const Trajectory& traj, double t) {
    if (t < 0.0 || t > traj.horizon() + 0.5 * traj.dt)
        throw Error(ErrorCode::ShiftBeyondHorizon, "attractor",
                    "shift exceeds the trajectory horizon", std::to_string(t));
    const long k = std::min<long>(index_for(traj, t), traj.samples() - 1);
    Trajectory out;
    out.dt = traj.dt;
    out.shift_offset = traj.shift_offset + double(k) * traj.dt;
    out.max_abs_vn = traj.max_abs_vn;
    out.vn_left_scan_range = traj.vn_left_scan_range;
    const int n = traj.samples();
    for (int i = int(k); i < n; ++i) {
        out.time.push_back(traj.time[i] - traj.time[k]);
        out.coeffs.push_back(traj.coeffs[i]);
        out.norm_h.push_back(traj.norm_h[i]);
        out.norm_v.push_back(traj.norm_v[i]);
        out.vprime_dual.push_back(traj.vprime_dual[i]);
        out.energy_slack.push_back(i == int(k) ? 0.0 : traj.energy_slack[i]);
        out.boundary_vn.push_back(traj.boundary_vn[i]);
    }
    return out;
}

WindowNorms window_norms(const Trajectory& traj, double h) {
    const long i0 = index_for(traj, h);
    const long i1 = i0 + index_for(traj, 1.0);
    if (i1 >= traj.samples())
        throw Error(ErrorCode::WindowBeyondHorizon, "attractor",
                    "window [h, h+1] exceeds the horizon", "h=" + std::to_string(h));
    WindowNorms w;
    w.h = traj.time[i0];
    double l2 = 0.0, l43 = 0.0, linf = 0.0;
    for (long i = i0; i <= i1; ++i) {
        const double scale = (i == i0 || i == i1) ? 0.5 : 1.0;
        l2 += scale * traj.norm_v[i] * traj.norm_v[i];
        l43 += scale * std::pow(traj.vprime_dual[i], 4.0 / 3.0);
        linf = std::max(linf, traj.norm_h[i]);
    }
    w.l2V = std::sqrt(l2 * traj.dt);
    w.linfH = linf;
    w.l43dual = std::pow(l43 * traj.dt, 0.75);
    w.f_norm = w.l2V + w.linfH + w.l43dual;
    return w;
}

double fb_norm(const Trajectory& traj, double stride) {
    if (traj.horizon() + 1e-12 < 1.0)
        throw Error(ErrorCode::HorizonTooShort, "attractor",
                    "fb norm needs a horizon of at least 1",
                    std::to_string(traj.horizon()));
    if (stride <= 0.0) stride = 10.0 * traj.dt;
    double sup = 0.0;
    for (double h = 0.0; h <= traj.horizon() - 1.0 + 1e-12; h += stride)
        sup = std::max(sup, window_norms(traj, h).f_norm);
    return sup;
}

GronwallReport gronwall_check(const Trajectory& traj, const ConstantsAudit& audit, double kappa) {
    GronwallReport report;
    report.kappa = kappa;
    report.radius = audit.gronwall_radius;
    const double r1 = audit.gronwall_radius * audit.gronwall_radius;
    const double rate = audit.C1 * audit.lambda1;

    const long iend = std::min<long>(index_for(traj, 1.0), traj.samples() - 1);
    double m0 = 0.0;
    for (long i = 0; i <= iend; ++i) m0 = std::max(m0, traj.norm_h[i]);
    report.m0 = m0;

    double max_excess = -1.0;
    for (int i = 0; i < traj.samples(); ++i) {
        const double envelope = std::exp(rate * (1.0 - traj.time[i])) * m0 * m0 + r1;
        const double h2 = traj.norm_h[i] * traj.norm_h[i];
        max_excess = std::max(max_excess, (h2 - envelope) / envelope);
    }
    report.max_excess_rel = max_excess;
    report.holds = max_excess <= 0.0;

    const double threshold = kappa * audit.gronwall_radius;
    int entry = traj.samples();
    for (int i = traj.samples() - 1; i >= 0; --i) {
        if (traj.norm_h[i] > threshold) break;
        entry = i;
    }
    report.entry_time = entry < traj.samples() ? traj.time[entry] : -1.0;

    const double excess = m0 * m0 / ((kappa * kappa - 1.0) * r1);
    report.predicted_entry = excess > 1.0 ? 1.0 + std::log(excess) / rate : 0.0;
    return report;
}

WindowEnvelopeReport window_envelope_check(const Trajectory& traj, const ConstantsAudit& audit,
                                           double stride) {
    if (stride <= 0.0) stride = 10.0 * traj.dt;
    WindowEnvelopeReport report;
    const double m0 = window_norms(traj, 0.0).linfH;
    for (double h = 0.0; h <= traj.horizon() - 1.0 + 1e-12; h += stride) {
        const WindowNorms w = window_norms(traj, h);
        const double lhs1 = w.l2V * w.l2V + w.linfH * w.linfH;
        const double rhs1 = audit.C4 + audit.C5 * m0 * m0 * std::exp(-audit.C6 * w.h);
        const double lhs2 = std::pow(w.l43dual, 4.0 / 3.0);
        const double rhs2 =
            audit.C7 + audit.C8 * std::pow(m0, 8.0 / 3.0) * std::exp(-audit.C9 * w.h);
        ++report.windows;
        report.max_ratio_first = std::max(report.max_ratio_first, lhs1 / rhs1);
        report.max_ratio_second = std::max(report.max_ratio_second, lhs2 / rhs2);
        if (lhs1 > rhs1) ++report.violations_first;
        if (lhs2 > rhs2) ++report.violations_second;
    }
    return report;
}

AbsorbingReport absorbing_check(const Trajectory& traj, const ConstantsAudit& audit,
                                double stride) {
    if (stride <= 0.0) stride = 10.0 * traj.dt;
    AbsorbingReport report;
    report.fb0 = window_norms(traj, 0.0).f_norm;
    const double arg = audit.Cabs * std::pow(report.fb0, audit.beta) / audit.R0;
    report.s0 = arg > 1.0 ? std::log(arg) / audit.delta : 0.0;
    for (double s = 0.0; s <= traj.horizon() - 1.0 + 1e-12; s += stride) {
        if (s < report.s0) continue;
        const double fb = fb_norm(shift(traj, s), stride);
        ++report.shifts_checked;
        report.max_fb_shifted = std::max(report.max_fb_shifted, fb);
        if (fb > 2.0 * audit.R0) ++report.violations;
    }
    return report;
}

AttractorReport ensemble_sections(const FlowParameters& params, const DivFreeBasis& basis,
                                  const OperatorSet& ops, const ConstantsAudit& audit, int count,
                                  double t_section, double delta, int samples_per_traj,
                                  double tol) {
    AttractorReport report;
    report.gronwall_radius = audit.gronwall_radius;
    report.r0 = audit.R0;
    report.cabs = audit.Cabs;
    report.beta = audit.beta;
    report.delta = audit.delta;
    report.tol = tol;

    std::vector<Trajectory> members(count);
    std::vector<std::future<Trajectory>> futures;
    futures.reserve(count);
    for (int c = 0; c < count; ++c) {
        FlowParameters p = params;
        p.v0.stream = params.v0.stream + std::uint64_t(c);
        futures.push_back(std::async(std::launch::async,
                                     [p, &basis, &ops, &audit] { return run(p, basis, ops, audit); }));
    }
    for (int c = 0; c < count; ++c) members[c] = futures[c].get();

    report.fb_norm = fb_norm(members[0]);
    const double threshold = (1.0 + tol) * audit.gronwall_radius;
    int inside = 0;
    for (const Trajectory& traj : members) {
        const GronwallReport g = gronwall_check(traj, audit);
        report.entry_times.push_back(g.entry_time);
        if (g.entry_time < 0.0 || g.entry_time > t_section) report.t_section_after_entry = false;
        for (int k = 0; k < samples_per_traj; ++k) {
            const double t = t_section + double(k) * delta;
            const long i = std::min<long>(index_for(traj, t), traj.samples() - 1);
            report.section_cloud.push_back(traj.coeffs[i]);
            report.cloud_norm_h.push_back(traj.norm_h[i]);
            report.cloud_norm_v.push_back(traj.norm_v[i]);
            report.cloud_h_radius = std::max(report.cloud_h_radius, traj.norm_h[i]);
            report.cloud_v_radius = std::max(report.cloud_v_radius, traj.norm_v[i]);
            if (traj.norm_h[i] <= threshold) ++inside;
        }
    }
    report.inside_fraction =
        report.section_cloud.empty() ? 0.0 : double(inside) / double(report.section_cloud.size());
    return report;
}

}  // namespace shearflow
