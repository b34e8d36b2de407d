#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "shearflow/attractor.hpp"
#include "shearflow/config.hpp"
#include "shearflow/constants.hpp"
#include "shearflow/detail/gauss.hpp"
#include "shearflow/error.hpp"
#include "shearflow/io.hpp"
#include "shearflow/rng.hpp"

namespace fs = std::filesystem;
using namespace shearflow;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool no_timestamp = false;
};

/// Everything a subcommand needs, assembled once from the config.
struct Workbench {
    RunConfig cfg;
    ChannelGeometry geom;
    DivFreeBasis basis;
    LiftField lift;
    OperatorSet ops;
    double gamma_norm = 0.0;
    double lambda1 = 0.0;
    double ladyzhenskaya = 0.0;
    double gnorm = 0.0;
    PotentialCertificate cert;
    ConstantsAudit audit;
};

Workbench build_workbench(const RunConfig& cfg) {
    Workbench w;
    w.cfg = cfg;
    w.geom = build_channel(cfg.L, cfg.h, cfg.quadrature);
    w.basis = build_basis(w.geom, cfg.K, cfg.M);
    w.lift = build_lift(cfg.s, cfg.lambda, w.geom, cfg.lift_alpha);
    w.ops = assemble_operators(w.basis, cfg.nu, w.lift);
    w.gamma_norm = trace_norm(w.basis);
    w.lambda1 = poincare_lambda1(w.basis);
    w.ladyzhenskaya = measure_ladyzhenskaya(w.basis, 256, cfg.seed);
    w.gnorm = g_operator_norm(w.basis, w.ops);
    const MollifiedPotential jn = mollify(cfg.potential, cfg.n_mollify);
    w.cert = certify(jn, cfg.scan, cfg.nu, w.gamma_norm, cfg.margin);
    w.audit = compute_constants(cfg.nu, w.gamma_norm, w.lambda1, w.cert, w.ops.f_dual_norm,
                                w.ladyzhenskaya, w.gnorm, w.geom.gamma0_measure(), cfg.lambda);
    return w;
}

void emit_resolved(const RunConfig& cfg, const fs::path& out) {
    write_text((out / "config.resolved").string(), cfg.resolved().dump(2) + "\n");
}

int cmd_constants_audit(const RunConfig& cfg, const fs::path& out) {
    const Workbench w = build_workbench(cfg);
    emit_resolved(cfg, out);
    const nlohmann::json audit = audit_to_json(w.audit);
    write_text((out / "audit.json").string(), audit.dump(2) + "\n");
    std::cout << audit.dump(2) << "\n";
    return 0;
}

int cmd_verify_operators(const RunConfig& cfg, const fs::path& out) {
    const Workbench w = build_workbench(cfg);
    emit_resolved(cfg, out);
    const DivFreeBasis& basis = w.basis;
    int failures = 0;
    const auto check = [&](const char* name, bool ok, double value) {
        std::printf("%-34s %s  (%.3e)\n", name, ok ? "pass" : "FAIL", value);
        if (!ok) ++failures;
    };

    double max_div = 0.0, max_bc1 = 0.0, max_bc0 = 0.0;
    for (int i = 0; i < basis.size(); ++i) {
        for (int q = 0; q < basis.node_weight.size(); ++q)
            max_div = std::max(max_div, std::abs(basis.g11(i, q) + basis.g22(i, q)));
        for (int p = 0; p < basis.nx1(); ++p) {
            const double x1 = basis.x1_nodes[p];
            const ModePoint top = basis.eval_mode(i, x1, basis.geometry.height(x1));
            max_bc1 = std::max({max_bc1, std::abs(top.v1), std::abs(top.v2)});
            const ModePoint bottom = basis.eval_mode(i, x1, 0.0);
            max_bc0 = std::max(max_bc0, std::abs(bottom.v1));
        }
    }
    check("divergence at nodes", max_div < 1e-12, max_div);
    check("v = 0 on Gamma1", max_bc1 < 1e-12, max_bc1);
    check("v_T = 0 on Gamma0", max_bc0 < 1e-12, max_bc0);

    const double sym_m =
        (basis.mass_matrix - basis.mass_matrix.transpose()).cwiseAbs().maxCoeff();
    const double sym_s =
        (basis.stiffness_matrix - basis.stiffness_matrix.transpose()).cwiseAbs().maxCoeff();
    check("mass symmetry", sym_m < 1e-12, sym_m);
    check("stiffness symmetry", sym_s < 1e-12, sym_s);

    const double rot_res =
        (basis.rotrot_matrix - basis.stiffness_matrix).cwiseAbs().maxCoeff();
    check("rot/grad identity (pairs)", rot_res < 1e-10, rot_res);

    // <Av,v> = nu ||v||^2 and <B(u,v),v> = 0 over random span vectors.
    auto rng = make_rng(cfg.seed, "verify-operators");
    std::normal_distribution<double> normal(0.0, 1.0);
    double max_a_rel = 0.0, max_b = 0.0;
    for (int d = 0; d < 100; ++d) {
        Eigen::VectorXd a(basis.size()), b(basis.size());
        for (int i = 0; i < basis.size(); ++i) a[i] = normal(rng);
        for (int i = 0; i < basis.size(); ++i) b[i] = normal(rng);
        const double vv = a.dot(basis.stiffness_matrix * a);
        max_a_rel = std::max(max_a_rel, std::abs(a.dot(w.ops.a_matrix * a) - cfg.nu * vv) /
                                            (cfg.nu * vv));
        const double buv = w.ops.convection(basis, b).dot(b) /
                           (basis.v_norm(b) * basis.v_norm(b) * basis.v_norm(b));
        max_b = std::max(max_b, std::abs(buv));
    }
    check("<Av,v> = nu |v|^2 (rel)", max_a_rel < 1e-10, max_a_rel);
    check("<B(u,v),v> = 0 (scaled)", max_b < 1e-10, max_b);

    const LiftBoundReport lb = lift_bound_check(basis, w.ops, 1000, cfg.seed);
    check("lift spectral radius <= lambda", lb.spectral_radius <= cfg.lambda,
          lb.spectral_radius);
    check("lift randomized violations", lb.violations == 0, double(lb.violations));

    // Lift rot/grad identity (3.4): int |rot w|^2 = int |grad w|^2; w depends
    // on x2 only so both reduce to int (w1')^2 over the support strip.
    double rot2 = 0.0, grad2 = 0.0;
    for (int q = 0; q < w.ops.strip_weight.size(); ++q) {
        const double d = w.lift.deriv(w.ops.strip_x2[q]);
        rot2 += w.ops.strip_weight[q] * w.ops.strip_rotw[q] * w.ops.strip_rotw[q];
        grad2 += w.ops.strip_weight[q] * d * d;
    }
    check("lift rot/grad identity", std::abs(rot2 - grad2) <= 1e-10 * std::max(1.0, rot2),
          std::abs(rot2 - grad2));

    const BoundaryIdentityReport bi = boundary_identity_check(basis, w.ops, 32, cfg.seed);
    check("interior identity residual", bi.max_interior_residual < 1e-8,
          bi.max_interior_residual);
    check("boundary identity residual", bi.max_boundary_residual < 1e-8,
          bi.max_boundary_residual);
    check("v = z identity residual", bi.max_vv_residual < 1e-8, bi.max_vv_residual);

    double max_dual_rel = 0.0;
    for (int d = 0; d < 100; ++d) {
        Eigen::VectorXd a(basis.size());
        for (int i = 0; i < basis.size(); ++i) a[i] = normal(rng);
        const double dn = w.ops.dual_norm(w.ops.a_matrix * a);
        max_dual_rel =
            std::max(max_dual_rel, std::abs(dn - cfg.nu * basis.v_norm(a)) /
                                       (cfg.nu * basis.v_norm(a)));
    }
    check("dual norm of A a (rel)", max_dual_rel < 1e-10, max_dual_rel);

    nlohmann::json report = {{"failures", failures},
                             {"divergence", max_div},
                             {"bc_gamma1", max_bc1},
                             {"bc_gamma0_tangent", max_bc0},
                             {"rot_grad_residual", rot_res},
                             {"a_identity_rel", max_a_rel},
                             {"b_skew", max_b},
                             {"lift_spectral_radius", lb.spectral_radius},
                             {"lift_violations", lb.violations},
                             {"interior_identity", bi.max_interior_residual},
                             {"boundary_identity", bi.max_boundary_residual},
                             {"dual_norm_rel", max_dual_rel}};
    write_text((out / "verify_operators.json").string(), report.dump(2) + "\n");
    return failures == 0 ? 0 : 1;
}

int cmd_verify_potential(const RunConfig& cfg, const fs::path& out) {
    const Workbench w = build_workbench(cfg);
    emit_resolved(cfg, out);
    int failures = 0;
    const auto check = [&](const char* name, bool ok, double value) {
        std::printf("%-34s %s  (%.3e)\n", name, ok ? "pass" : "FAIL", value);
        if (!ok) ++failures;
    };

    // Mollifier mass and support.
    const auto [gx, gw] = detail::gauss_legendre_01(200);
    double mass = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i) mass += gw[i] * 2.0 * bump_kernel(2.0 * gx[i] - 1.0);
    check("mollifier unit mass", std::abs(mass - 1.0) < 1e-10, std::abs(mass - 1.0));
    check("mollifier support", bump_kernel(1.0) == 0.0 && bump_kernel(-1.0) == 0.0, 0.0);

    std::vector<int> n_list = {4, 8, 16, 32, 64, 128, 256};
    const StabilityReport stab = constant_stability_scan(cfg.potential, n_list, cfg.scan, cfg.nu,
                                                         w.gamma_norm, 0.1, cfg.margin);
    check("stability scan converged", stab.converged, double(stab.n0));
    check("drift beyond N0 < 10%", stab.drift_beyond_n0 < 0.1, stab.drift_beyond_n0);
    const double ceiling = cfg.margin * cfg.nu / (w.gamma_norm * w.gamma_norm);
    double worst_d2 = 0.0;
    for (const auto& row : stab.rows) worst_d2 = std::max(worst_d2, row.cert.d2);
    check("d2 below margin ceiling", worst_d2 < ceiling, worst_d2);

    nlohmann::json report = stability_to_json(stab);
    report["failures"] = failures;
    write_text((out / "verify_potential.json").string(), report.dump(2) + "\n");
    return failures == 0 ? 0 : 1;
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out, bool with_timestamp) {
    const Workbench w = build_workbench(cfg);
    emit_resolved(cfg, out);
    if (cfg.cache)
        save_operator_cache((out / "operators.cache").string(), w.basis, w.ops);

    FlowParameters params = cfg.flow_parameters();
    const std::uint64_t cfg_hash = cfg.content_hash();
    CheckpointSink sink;
    if (cfg.checkpoint_every > 0) {
        sink = [&](long step, const Eigen::VectorXd& a) {
            write_checkpoint((out / ("checkpoint_" + std::to_string(step) + ".bin")).string(),
                             cfg_hash, step, a);
        };
    }
    const Trajectory traj = run(params, w.basis, w.ops, w.audit, sink);

    const EnergyReport energy = energy_monitor(traj, w.audit, cfg.energy_tol_coeff);
    const VPrimeReport vp = vprime_monitor(traj, w.audit);

    if (cfg.write_csv) {
        write_trajectory_csv((out / "trajectory.csv").string(), traj, with_timestamp);
        write_energy_csv((out / "energy.csv").string(), traj, w.audit, cfg.energy_tol_coeff);
    }
    if (cfg.write_json) {
        nlohmann::json meta = {{"config_hash", cfg_hash},
                               {"samples", traj.samples()},
                               {"horizon", traj.horizon()},
                               {"max_abs_vn", traj.max_abs_vn},
                               {"vn_left_scan_range", traj.vn_left_scan_range},
                               {"energy_violations", energy.violations},
                               {"energy_max_slack", energy.max_slack},
                               {"vprime_violations", vp.violations},
                               {"vprime_max_ratio", vp.max_ratio}};
        write_text((out / "audit.json").string(), audit_to_json(w.audit).dump(2) + "\n");
        write_text((out / "simulate.json").string(), meta.dump(2) + "\n");
    }
    if (cfg.plots) write_norm_plot_svg((out / "norms.svg").string(), traj);

    std::printf("samples %d  |v|_H(end) %.6g  energy violations %d  vprime violations %d\n",
                traj.samples(), traj.norm_h.back(), energy.violations, vp.violations);
    if (energy.violations > 0)
        std::fprintf(stderr, "warning: energy inequality exceeded tolerance on %d steps\n",
                     energy.violations);
    return (energy.violations == 0 && vp.violations == 0) ? 0 : 1;
}

int cmd_attractor(const RunConfig& cfg, const fs::path& out) {
    const Workbench w = build_workbench(cfg);
    emit_resolved(cfg, out);
    FlowParameters params = cfg.flow_parameters();
    const AttractorReport report =
        ensemble_sections(params, w.basis, w.ops, w.audit, cfg.ensemble, cfg.t_section,
                          cfg.section_delta, cfg.section_samples, cfg.cloud_tol);

    // Diagnostics on the first member re-run (same seed/stream).
    const Trajectory traj = run(params, w.basis, w.ops, w.audit);
    const GronwallReport gron = gronwall_check(traj, w.audit, cfg.entry_kappa);
    const WindowEnvelopeReport env = window_envelope_check(traj, w.audit, cfg.window_stride);
    const AbsorbingReport absorb = absorbing_check(traj, w.audit, cfg.window_stride);

    nlohmann::json j = attractor_to_json(report);
    j["gronwall"] = {{"holds", gron.holds},
                     {"max_excess_rel", gron.max_excess_rel},
                     {"entry_time", gron.entry_time},
                     {"predicted_entry", gron.predicted_entry},
                     {"m0", gron.m0},
                     {"kappa", gron.kappa}};
    j["window_envelopes"] = {{"windows", env.windows},
                             {"violations_first", env.violations_first},
                             {"violations_second", env.violations_second},
                             {"max_ratio_first", env.max_ratio_first},
                             {"max_ratio_second", env.max_ratio_second}};
    j["absorbing"] = {{"fb0", absorb.fb0},
                      {"s0", absorb.s0},
                      {"shifts_checked", absorb.shifts_checked},
                      {"violations", absorb.violations},
                      {"max_fb_shifted", absorb.max_fb_shifted}};
    write_text((out / "attractor.json").string(), j.dump(2) + "\n");
    write_sections_csv((out / "sections.csv").string(), report, cfg.section_samples);
    write_text((out / "audit.json").string(), audit_to_json(w.audit).dump(2) + "\n");

    const bool ok = gron.holds && env.violations_first == 0 && env.violations_second == 0 &&
                    absorb.violations == 0 && report.inside_fraction == 1.0;
    std::printf("ensemble %d  cloud H-radius %.6g (ball %.6g)  inside fraction %.3f  %s\n",
                cfg.ensemble, report.cloud_h_radius, report.gronwall_radius,
                report.inside_fraction, ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral Galerkin channel flow with a multivalued leak boundary law"};
    app.require_subcommand(1);

    CommonArgs args;
    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", args.config_path, "run configuration file (JSON)")
            ->required();
        cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
        cmd->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
            args.seed_set = true;
        });
        cmd->add_flag("--no-timestamp", args.no_timestamp,
                      "omit the timestamp header from CSV outputs");
    };

    CLI::App* c_verify_ops = app.add_subcommand("verify-operators",
                                                "geometry and operator invariant suites");
    CLI::App* c_verify_pot = app.add_subcommand("verify-potential",
                                                "certification and mollification stability");
    CLI::App* c_simulate = app.add_subcommand("simulate", "single trajectory with monitors");
    CLI::App* c_attractor = app.add_subcommand("attractor", "ensemble and attractor report");
    CLI::App* c_audit = app.add_subcommand("constants-audit", "emit the constants audit JSON");
    for (CLI::App* cmd : {c_verify_ops, c_verify_pot, c_simulate, c_attractor, c_audit})
        add_common(cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = parse_config(args.config_path);
        if (args.seed_set) {
            cfg.seed = args.seed;
            cfg.v0.seed = args.seed;
        }
        if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
        fs::path out(cfg.out_dir);
        std::error_code ec;
        fs::create_directories(out, ec);

        if (c_verify_ops->parsed()) return cmd_verify_operators(cfg, out);
        if (c_verify_pot->parsed()) return cmd_verify_potential(cfg, out);
        if (c_simulate->parsed()) return cmd_simulate(cfg, out, !args.no_timestamp);
        if (c_attractor->parsed()) return cmd_attractor(cfg, out);
        if (c_audit->parsed()) return cmd_constants_audit(cfg, out);
        return 2;
    } catch (const Error& err) {
        std::cerr << error_to_json(err).dump() << "\n";
        switch (err.code()) {
            case ErrorCode::UnknownKey:
            case ErrorCode::MissingBlock:
            case ErrorCode::ConfigType:
            case ErrorCode::BadPeriod:
            case ErrorCode::NonPositiveHeight:
            case ErrorCode::IoError:
                return 2;
            default:
                return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json({{"code", "Unexpected"},
                                     {"module", "cli"},
                                     {"message", e.what()},
                                     {"witness", ""}})
                         .dump()
                  << "\n";
        return 1;
    }
}
