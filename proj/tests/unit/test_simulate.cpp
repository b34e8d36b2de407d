#include <doctest.h>

#include <cmath>

#include "shearflow/constants.hpp"
#include "shearflow/error.hpp"
#include "shearflow/simulate.hpp"

using namespace shearflow;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Setup {
    ChannelGeometry geom;
    DivFreeBasis basis;
    LiftField lift;
    OperatorSet ops;
    ConstantsAudit audit;
    FlowParameters params;
};

Setup make_setup(int K, int M, double s, double nu = 1.0, double lambda = 0.2) {
    Setup su;
    su.geom = build_channel(kTwoPi, HeightProfile{1.0, {}, {}});
    su.basis = build_basis(su.geom, K, M);
    su.lift = build_lift(s, lambda, su.geom);
    su.ops = assemble_operators(su.basis, nu, su.lift);
    const double gamma = trace_norm(su.basis);
    const MollifiedPotential jn = mollify(Superpotential::pressure_drop(), 32);
    const PotentialCertificate cert = certify(jn, ScanSpec{}, nu, std::max(gamma, 1e-8));
    su.audit = compute_constants(nu, gamma, poincare_lambda1(su.basis), cert, su.ops.f_dual_norm,
                                 measure_ladyzhenskaya(su.basis, 128, 1),
                                 g_operator_norm(su.basis, su.ops), su.geom.gamma0_measure(),
                                 lambda);
    su.params.nu = nu;
    su.params.s = s;
    su.params.lambda = lambda;
    su.params.potential = Superpotential::pressure_drop();
    su.params.n_mollify = 32;
    su.params.dt = 1e-3;
    su.params.t_end = 1.0;
    return su;
}

// Independent reference integrator for the time-stepping oracles: classical
// RK4 on the same Galerkin ODE, far below the production step size.
struct Rk4Reference {
    const DivFreeBasis& basis;
    const OperatorSet& ops;
    const MollifiedPotential* jn;
    bool convection = true;
    bool boundary = true;
    Eigen::LLT<Eigen::MatrixXd> mass_llt;

    Rk4Reference(const DivFreeBasis& b, const OperatorSet& o, const MollifiedPotential* j)
        : basis(b), ops(o), jn(j) {
        mass_llt.compute(basis.mass_matrix);
    }

    Eigen::VectorXd rhs(const Eigen::VectorXd& a) const {
        Eigen::VectorXd load = ops.f_vector + ops.g_apply(a) - ops.a_matrix * a;
        if (convection) load -= ops.convection(basis, a);
        if (boundary && jn) {
            const Eigen::VectorXd vn = basis.normal_trace(a);
            Eigen::VectorXd xi(vn.size());
            for (int p = 0; p < vn.size(); ++p) xi[p] = jn->deriv(vn[p]);
            load -= basis.trace_normal.transpose() *
                    (basis.boundary_weights.array() * xi.array()).matrix();
        }
        return mass_llt.solve(load);
    }

    Eigen::VectorXd integrate(Eigen::VectorXd a, double t_end, double dt) const {
        const long n = std::lround(t_end / dt);
        for (long k = 0; k < n; ++k) {
            const Eigen::VectorXd k1 = rhs(a);
            const Eigen::VectorXd k2 = rhs(a + 0.5 * dt * k1);
            const Eigen::VectorXd k3 = rhs(a + 0.5 * dt * k2);
            const Eigen::VectorXd k4 = rhs(a + dt * k3);
            a += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return a;
    }
};
}  // namespace

TEST_CASE("initial conditions: zero, eigenmode, random ball scaling") {
    const Setup su = make_setup(2, 3, 1.0);
    CHECK(make_initial_coefficients(su.basis, InitialCondition::zero()).cwiseAbs().maxCoeff() ==
          0.0);
    const Eigen::VectorXd e1 = make_initial_coefficients(su.basis, InitialCondition::eigenmode(1, 2.5));
    CHECK((e1 - 2.5 * su.basis.stokes_vectors.col(1)).cwiseAbs().maxCoeff() == 0.0);
    for (double r : {0.5, 4.0}) {
        const Eigen::VectorXd a =
            make_initial_coefficients(su.basis, InitialCondition::random_h_ball(r, 42));
        CHECK(su.basis.h_norm(a) == doctest::Approx(r).epsilon(1e-12));
    }
    // different substreams give different draws
    const Eigen::VectorXd a0 = make_initial_coefficients(
        su.basis, InitialCondition::random_h_ball(1.0, 42, 0));
    const Eigen::VectorXd a1 = make_initial_coefficients(
        su.basis, InitialCondition::random_h_ball(1.0, 42, 1));
    CHECK((a0 - a1).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("zero state with zero forcing is an exact fixed point") {
    Setup su = make_setup(1, 2, 0.0);  // s = 0: F = 0, G = 0; j_n'(0) = 0 for even j
    su.params.s = 0.0;
    su.params.v0 = InitialCondition::zero();
    su.params.t_end = 0.02;
    const Trajectory traj = run(su.params, su.basis, su.ops, su.audit);
    for (const auto& a : traj.coeffs) CHECK(a.cwiseAbs().maxCoeff() == 0.0);
    for (double h : traj.norm_h) CHECK(h == 0.0);
}

TEST_CASE("one Crank-Nicolson step on a Stokes eigenmode is the exact rational factor") {
    const Setup su = make_setup(2, 3, 0.0);
    TimeStepper stepper(su.basis, su.ops, nullptr, 1e-2, false, false);
    const int k = 2;
    GalerkinState state;
    state.t = 0.0;
    state.a = su.basis.stokes_vectors.col(k);
    const GalerkinState next = stepper.step(state);
    const double z = su.params.nu * su.basis.stokes_values[k] * 1e-2;
    const double factor = (1.0 - 0.5 * z) / (1.0 + 0.5 * z);
    CHECK((next.a - factor * state.a).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("stokes decay oracle: eigenmode rates match exp(-nu mu_k t)") {
    Setup su = make_setup(2, 3, 0.0, 1.0);
    su.params.convection_enabled = false;
    su.params.boundary_enabled = false;
    su.params.s = 0.0;
    su.params.dt = 1e-3;
    su.params.t_end = 0.1;  // 100 steps
    for (int k : {0, 1, 2}) {
        su.params.v0 = InitialCondition::eigenmode(k, 1.0);
        const Trajectory traj = run(su.params, su.basis, su.ops, su.audit);
        const Eigen::VectorXd phi = su.basis.stokes_vectors.col(k);
        const double c0 = phi.dot(su.basis.mass_matrix * traj.coeffs.front());
        const double cT = phi.dot(su.basis.mass_matrix * traj.coeffs.back());
        const double T = traj.horizon();
        const double mu = su.basis.stokes_values[k];
        const double rate = -std::log(cT / c0) / T;
        CHECK(std::abs(rate - mu) / mu < 1e-4);
        CHECK(std::abs(cT / c0 - std::exp(-mu * T)) / std::exp(-mu * T) < 1e-4);
    }
}

TEST_CASE("step halving shows first-order consistency") {
    Setup su = make_setup(1, 1, 1.0);
    const MollifiedPotential jn = mollify(su.params.potential, 32);
    const Eigen::VectorXd a0 =
        make_initial_coefficients(su.basis, InitialCondition::random_h_ball(0.3, 7));
    const double horizon = 0.1;

    const Rk4Reference ref(su.basis, su.ops, &jn);
    const Eigen::VectorXd exact = ref.integrate(a0, horizon, 1e-5);

    const auto imex_error = [&](double dt) {
        MollifiedPotential jn_fast = jn;
        jn_fast.build_table(-8.0, 8.0, 32769);
        TimeStepper stepper(su.basis, su.ops, &jn_fast, dt);
        GalerkinState state{0.0, a0};
        const long n = std::lround(horizon / dt);
        for (long i = 0; i < n; ++i) state = stepper.step(state);
        return (state.a - exact).cwiseAbs().maxCoeff();
    };
    const double e1 = imex_error(2e-3);
    const double e2 = imex_error(1e-3);
    CHECK(e1 / e2 > 1.6);
    CHECK(e1 / e2 < 2.6);
}

TEST_CASE("small-N oracle: production IMEX against the RK4 reference") {
    Setup su = make_setup(1, 1, 1.0);  // N = 3 modes
    REQUIRE(su.basis.size() == 3);
    const MollifiedPotential jn = mollify(su.params.potential, 32);
    const Eigen::VectorXd a0 =
        make_initial_coefficients(su.basis, InitialCondition::random_h_ball(0.25, 11));

    const Rk4Reference ref(su.basis, su.ops, &jn);
    const Eigen::VectorXd exact = ref.integrate(a0, 1.0, 1e-5);

    su.params.dt = 1e-4;
    su.params.t_end = 1.0;
    su.params.v0 = InitialCondition::random_h_ball(0.25, 11);
    const Trajectory traj = run(su.params, su.basis, su.ops, su.audit);
    CHECK((traj.coeffs.back() - exact).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("identical configurations give bit-identical trajectories") {
    Setup su = make_setup(2, 2, 1.0);
    su.params.v0 = InitialCondition::random_h_ball(1.0, 99);
    su.params.t_end = 0.05;
    const Trajectory t1 = run(su.params, su.basis, su.ops, su.audit);
    const Trajectory t2 = run(su.params, su.basis, su.ops, su.audit);
    REQUIRE(t1.samples() == t2.samples());
    for (int i = 0; i < t1.samples(); ++i) {
        CHECK((t1.coeffs[i] - t2.coeffs[i]).cwiseAbs().maxCoeff() == 0.0);
        CHECK(t1.vprime_dual[i] == t2.vprime_dual[i]);
    }
}

TEST_CASE("energy monitor: zero trajectory has sigma = -C2 (1 + |F|^2)") {
    Setup su = make_setup(1, 2, 0.0);
    su.params.v0 = InitialCondition::zero();
    su.params.t_end = 0.01;
    const Trajectory traj = run(su.params, su.basis, su.ops, su.audit);
    const EnergyReport report = energy_monitor(traj, su.audit);
    CHECK(report.violations == 0);
    const double expected = -su.audit.C2 * (1.0 + su.audit.f_dual_norm * su.audit.f_dual_norm);
    CHECK(report.max_slack == doctest::Approx(expected));
    CHECK(report.max_slack <= 0.0);
}

TEST_CASE("energy and vprime monitors pass on a driven run") {
    Setup su = make_setup(2, 3, 1.0);
    su.params.v0 = InitialCondition::random_h_ball(10.0 * su.audit.gronwall_radius, 4);
    su.params.t_end = 2.0;
    const Trajectory traj = run(su.params, su.basis, su.ops, su.audit);
    const EnergyReport energy = energy_monitor(traj, su.audit);
    CHECK(energy.violations == 0);
    CHECK(energy.integrated_slack <= energy.integrated_tol);
    const VPrimeReport vp = vprime_monitor(traj, su.audit);
    CHECK(vp.violations == 0);
    CHECK(vp.max_ratio < 1.0);

    // (3.6) integrated inequality, rebuilt from the channels directly
    double sum_v2 = 0.0;
    const double c2k = su.audit.C2 * (1.0 + su.audit.f_dual_norm * su.audit.f_dual_norm);
    for (int i = 1; i < traj.samples(); ++i) {
        sum_v2 += traj.dt * traj.norm_v[i] * traj.norm_v[i];
        const double lhs = 0.5 * traj.norm_h[i] * traj.norm_h[i] + su.audit.C1 * sum_v2;
        const double rhs = 0.5 * traj.norm_h[0] * traj.norm_h[0] + c2k * traj.time[i] +
                           energy.integrated_tol;
        CHECK(lhs <= rhs * (1 + 1e-12));
    }
}

TEST_CASE("selection legality along a run") {
    Setup su = make_setup(2, 3, 1.0);
    su.params.v0 = InitialCondition::random_h_ball(2.0, 21);
    su.params.t_end = 0.2;
    const Trajectory traj = run(su.params, su.basis, su.ops, su.audit);
    const MollifiedPotential jn = mollify(su.params.potential, su.params.n_mollify);
    const SelectionReport report = selection_check(traj, jn, 10, 1e-6);
    CHECK(report.checked > 0);
    CHECK(report.violations == 0);
}

TEST_CASE("vprime monitor formula and violation counting on synthetic channels") {
    Setup su = make_setup(1, 1, 0.0);
    Trajectory traj;
    traj.dt = 1.0;
    traj.time = {0.0, 1.0};
    traj.norm_h = {4.0, 4.0};
    traj.norm_v = {9.0, 9.0};
    const double rhs = su.audit.C3 * (1.0 + 9.0 + std::sqrt(4.0) * std::pow(9.0, 1.5));
    traj.vprime_dual = {rhs * 0.99, rhs * 1.01};
    traj.energy_slack = {0.0, 0.0};
    traj.coeffs = {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
    traj.boundary_vn = {Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)};
    const VPrimeReport report = vprime_monitor(traj, su.audit);
    CHECK(report.violations == 1);
    CHECK(report.max_ratio == doctest::Approx(1.01));
}

TEST_CASE("blow-up guard raises NonFiniteState with the step index") {
    Setup su = make_setup(1, 2, 1.0);
    su.params.dt = 50.0;  // absurd step: the explicit terms explode
    su.params.t_end = 5000.0;
    su.params.v0 = InitialCondition::random_h_ball(100.0, 3);
    try {
        (void)run(su.params, su.basis, su.ops, su.audit);
        FAIL("expected NonFiniteState");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteState);
        CHECK(e.witness().find("step=") != std::string::npos);
    }
}

TEST_CASE("checkpoint sink fires at the configured cadence") {
    Setup su = make_setup(1, 1, 0.0);
    su.params.v0 = InitialCondition::random_h_ball(0.5, 2);
    su.params.dt = 1e-3;
    su.params.t_end = 0.02;
    su.params.checkpoint_every = 5;
    std::vector<long> steps;
    (void)run(su.params, su.basis, su.ops, su.audit,
              [&](long step, const Eigen::VectorXd&) { steps.push_back(step); });
    CHECK(steps == std::vector<long>{5, 10, 15, 20});
}

TEST_CASE("ladyzhenskaya measurement dominates trajectory states") {
    Setup su = make_setup(2, 3, 1.0);
    su.params.v0 = InitialCondition::random_h_ball(5.0, 8);
    su.params.t_end = 0.2;
    const Trajectory traj = run(su.params, su.basis, su.ops, su.audit);
    for (int i = 0; i < traj.samples(); i += 20) {
        const Eigen::VectorXd& a = traj.coeffs[i];
        if (su.basis.h_norm(a) < 1e-12) continue;
        const double ratio = su.basis.l4_norm(a) /
                             (std::sqrt(su.basis.h_norm(a)) * std::sqrt(su.basis.v_norm(a)));
        CHECK(ratio <= su.audit.ladyzhenskaya);
    }
}
