#ifndef SHEARFLOW_CONSTANTS_HPP
#define SHEARFLOW_CONSTANTS_HPP

#include <map>
#include <string>

#include "shearflow/potential.hpp"

namespace shearflow {

/// Every named constant of the energy/attractor estimates together with the
/// closed-form formula it was computed from. The formulas are frozen from the
/// a-priori estimate chain:
///
///   slack = nu - d2 gamma^2,  eps = lambda = slack/4
///   C1 = slack/2
///   C2 = max(1/slack, |d1| m(Gamma0))
///   C3 = max(F* + sqrt2 c1 sqrt(m) gamma,  nu + Cg + sqrt2 c2 gamma^2,
///            CL^2 lambda1^(-1/4))
///   C10 = 2 * 3^(1/3) * C3^(4/3)
///   K = 1 + F*^2,  R1 = C2 K / (C1 lambda1)  (Gronwall ball radius^2)
///   E = exp(C1 lambda1), Q0 = C2 K (1/C1 + 1/(2 C1^2 lambda1)), Q1 = E/(2 C1)
///   C4 = Q0 + R1,  C5 = E (1 + 1/(2 C1)),  C6 = C1 lambda1
///   C7 = C10 (1 + (1 + R1^(1/3)) (Q0 + Q1) + E^(1/3) Q0)
///   C8 = C10 ((1 + R1^(1/3)) Q1 + E^(1/3) (Q0 + Q1)),  C9 = C6/3
///   R0 = 2 sqrt(C4) + C7^(3/4) + 2 sqrt(C5)
///   Cabs = 2 sqrt(C5) + C8^(3/4),  beta = 2,  delta = C6/4
struct ConstantsAudit {
    // Inputs and measured discrete constants.
    double nu = 0.0;
    double gamma_norm = 0.0;
    double lambda1 = 0.0;
    double f_dual_norm = 0.0;
    double gamma0_measure = 0.0;
    double c1 = 0.0, c2 = 0.0, d1 = 0.0, d2 = 0.0;
    double ladyzhenskaya = 0.0;  ///< sampled L4 constant, includes its safety factor
    double g_norm = 0.0;         ///< measured ||G||_{V -> V*}
    double lambda_used = 0.0;    ///< lift smallness the run was built with

    // Derived constants.
    double C1 = 0.0, C2 = 0.0, C3 = 0.0, C10 = 0.0;
    double C4 = 0.0, C5 = 0.0, C6 = 0.0, C7 = 0.0, C8 = 0.0, C9 = 0.0;
    double R0 = 0.0, Cabs = 0.0, beta = 0.0, delta = 0.0;
    double gronwall_radius = 0.0;

    std::map<std::string, std::string> formulas;
};

/// Evaluates the audit chain. Throws InvalidCertificate when C1 <= 0 or when
/// the lift smallness exceeds the slack/4 budget the frozen formulas assume.
ConstantsAudit compute_constants(double nu, double gamma_norm, double lambda1,
                                 const PotentialCertificate& cert, double f_dual_norm,
                                 double ladyzhenskaya_const, double g_norm,
                                 double gamma0_measure, double lambda_used);

}  // namespace shearflow

#endif
