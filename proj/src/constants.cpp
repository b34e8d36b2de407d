#include "shearflow/constants.hpp"

#include <cmath>

#include "shearflow/error.hpp"

namespace shearflow {

ConstantsAudit compute_constants(double nu, double gamma_norm, double lambda1,
                                 const PotentialCertificate& cert, double f_dual_norm,
                                 double ladyzhenskaya_const, double g_norm,
                                 double gamma0_measure, double lambda_used) {
    ConstantsAudit a;
    a.nu = nu;
    a.gamma_norm = gamma_norm;
    a.lambda1 = lambda1;
    a.f_dual_norm = f_dual_norm;
    a.gamma0_measure = gamma0_measure;
    a.c1 = cert.c1;
    a.c2 = cert.c2;
    a.d1 = cert.d1;
    a.d2 = cert.d2;
    a.ladyzhenskaya = ladyzhenskaya_const;
    a.g_norm = g_norm;
    a.lambda_used = lambda_used;

    const double slack = nu - cert.d2 * gamma_norm * gamma_norm;
    a.C1 = 0.5 * slack;
    if (!(a.C1 > 0.0))
        throw Error(ErrorCode::InvalidCertificate, "simulate",
                    "d2 >= nu/gamma^2 leaves no dissipation margin",
                    "slack=" + std::to_string(slack));
    // The frozen constants take the proof's lambda = eps = slack/4; a lift
    // built with a larger smallness target would invalidate them.
    if (lambda_used > 0.25 * slack * (1.0 + 1e-12))
        throw Error(ErrorCode::InvalidCertificate, "simulate",
                    "lift smallness exceeds (nu - d2 gamma^2)/4",
                    "lambda=" + std::to_string(lambda_used) +
                        " budget=" + std::to_string(0.25 * slack));

    a.C2 = std::max(1.0 / slack, std::abs(cert.d1) * gamma0_measure);

    const double m = gamma0_measure;
    const double sqrt2 = std::sqrt(2.0);
    a.C3 = std::max({f_dual_norm + sqrt2 * cert.c1 * std::sqrt(m) * gamma_norm,
                     nu + g_norm + sqrt2 * cert.c2 * gamma_norm * gamma_norm,
                     ladyzhenskaya_const * ladyzhenskaya_const * std::pow(lambda1, -0.25)});
    a.C10 = 2.0 * std::cbrt(3.0) * std::pow(a.C3, 4.0 / 3.0);

    const double K = 1.0 + f_dual_norm * f_dual_norm;
    const double R1 = a.C2 * K / (a.C1 * lambda1);
    a.gronwall_radius = std::sqrt(R1);

    const double E = std::exp(a.C1 * lambda1);
    const double Q0 = a.C2 * K * (1.0 / a.C1 + 1.0 / (2.0 * a.C1 * a.C1 * lambda1));
    const double Q1 = E / (2.0 * a.C1);

    a.C4 = Q0 + R1;
    a.C5 = E * (1.0 + 1.0 / (2.0 * a.C1));
    a.C6 = a.C1 * lambda1;
    a.C7 = a.C10 * (1.0 + (1.0 + std::cbrt(R1)) * (Q0 + Q1) + std::cbrt(E) * Q0);
    a.C8 = a.C10 * ((1.0 + std::cbrt(R1)) * Q1 + std::cbrt(E) * (Q0 + Q1));
    a.C9 = a.C6 / 3.0;

    a.R0 = 2.0 * std::sqrt(a.C4) + std::pow(a.C7, 0.75) + 2.0 * std::sqrt(a.C5);
    a.Cabs = 2.0 * std::sqrt(a.C5) + std::pow(a.C8, 0.75);
    a.beta = 2.0;
    a.delta = a.C6 / 4.0;

    a.formulas = {
        {"C1", "(nu - d2*gamma^2)/2"},
        {"C2", "max(1/(nu - d2*gamma^2), |d1|*m(Gamma0))  [= max(1/(4 eps), |d1| m), eps = slack/4]"},
        {"C3",
         "max(F* + sqrt(2) c1 sqrt(m(Gamma0)) gamma, nu + Cg + sqrt(2) c2 gamma^2, "
         "CL^2 lambda1^(-1/4))"},
        {"C10", "2 * 3^(1/3) * C3^(4/3)"},
        {"C4", "Q0 + R1, Q0 = C2 K (1/C1 + 1/(2 C1^2 lambda1)), R1 = C2 K/(C1 lambda1), K = 1+F*^2"},
        {"C5", "exp(C1 lambda1) (1 + 1/(2 C1))"},
        {"C6", "C1 * lambda1"},
        {"C7", "C10 (1 + (1 + R1^(1/3))(Q0 + Q1) + E^(1/3) Q0), E = exp(C1 lambda1), Q1 = E/(2 C1)"},
        {"C8", "C10 ((1 + R1^(1/3)) Q1 + E^(1/3) (Q0 + Q1))"},
        {"C9", "C6 / 3"},
        {"R0", "2 sqrt(C4) + C7^(3/4) + 2 sqrt(C5)"},
        {"Cabs", "2 sqrt(C5) + C8^(3/4)"},
        {"beta", "2  [= (8/3) * (3/4)]"},
        {"delta", "C6 / 4  [= min(C6/2, 3 C9/4)]"},
        {"gronwall_radius", "sqrt(C2 (1 + F*^2) / (C1 lambda1))"},
        {"ladyzhenskaya", "sampled max ||v||_L4 / (||v||_H^(1/2) ||v||^(1/2)) * safety"},
        {"g_norm", "largest singular value of L^-1 (Gvw+Gwv)^T L^-T, S = L L^T"},
    };
    return a;
}

}  // namespace shearflow
