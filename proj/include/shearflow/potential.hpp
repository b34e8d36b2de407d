#ifndef SHEARFLOW_POTENTIAL_HPP
#define SHEARFLOW_POTENTIAL_HPP

#include <string>
#include <vector>

namespace shearflow {

/// Closed interval [lo, hi]; degenerate at smooth points.
struct ClarkeInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

/// One smooth piece: polynomial plus an optional Gaussian term
/// amp * exp(-s^2/2) (enough for the built-in potentials and the generic
/// piecewise-polynomial config block).
struct PotentialPiece {
    std::vector<double> poly;  ///< monomial coefficients, low order first
    double gauss_amp = 0.0;

    double value(double s) const;
    double deriv(double s) const;
    double deriv2(double s) const;
};

/// Locally Lipschitz superpotential j as finitely many C^1 pieces joined
/// continuously at breakpoints (derivative jumps allowed). The Clarke
/// subdifferential is then exactly computable as the hull of one-sided
/// derivative limits.
class Superpotential {
  public:
    std::string name = "custom";
    std::vector<double> breakpoints;      ///< ascending
    std::vector<PotentialPiece> pieces;   ///< breakpoints.size() + 1 entries

    static Superpotential quadratic();                 ///< j(s) = s^2/2
    /// j(s) = s^2 for |s| <= 1, 1 + 0.1 (s^2 - 1) for |s| > 1 (leak law with
    /// a pressure drop at threshold normal velocity).
    static Superpotential pressure_drop();
    static Superpotential gaussian_well(double alpha);  ///< s^2/2 + alpha exp(-s^2/2)
    static Superpotential piecewise(std::vector<double> breakpoints,
                                    std::vector<PotentialPiece> pieces,
                                    std::string name = "custom");

    /// Checks piece-count consistency and value continuity (< 1e-12 mismatch).
    void validate() const;

    int piece_containing(double s) const;  ///< right-continuous selection
    double value(double s) const;
    double deriv(double s) const;   ///< derivative of the containing piece
    double deriv2(double s) const;

    ClarkeInterval clarke(double s) const;
    /// Hull of the Clarke intervals over [lo, hi] (dense piecewise sampling).
    ClarkeInterval derivative_hull(double lo, double hi) const;
};

/// {j'(s)} at smooth points, the hull of one-sided derivative limits at a
/// breakpoint.
ClarkeInterval clarke_interval(const Superpotential& j, double s);

/// Normalized smooth bump, supp (-1,1), nonnegative, unit integral.
double bump_kernel(double t);

/// j_n = rho_n * j with rho_n(s) = n rho(n s); j_n is C^1 with
/// j_n'(r) = integral of rho_n(t) j'(r-t). Values and derivatives are
/// evaluated by segment-split Gauss quadrature of the convolution; an
/// optional Hermite table accelerates the stepping hot path.
class MollifiedPotential {
  public:
    Superpotential base;
    int n = 1;
    int quad_points = 32;

    double value(double r) const;
    double deriv(double r) const;
    double deriv2(double r) const;

    /// Evaluates with adaptive node doubling until |change| <= tol; throws
    /// QuadratureBudgetExceeded when the budget runs out first.
    double deriv_checked(double r, double tol, int max_points = 512) const;

    /// Hermite interpolation table over [lo, hi] for deriv(); out-of-range
    /// arguments fall back to direct quadrature.
    void build_table(double lo, double hi, int samples);
    bool has_table() const { return !table_f_.empty(); }
    double deriv_fast(double r) const;

  private:
    double table_lo_ = 0.0, table_hi_ = 0.0, table_h_ = 0.0;
    std::vector<double> table_f_, table_d_;
};

MollifiedPotential mollify(const Superpotential& j, int n, int quad_points = 32);

struct ScanSpec {
    double lo = -50.0;
    double hi = 50.0;
    int samples = 2001;
};

/// Certified H(j) constants over a scan range:
///   |xi| <= c1 + c2 |s|   and   inf_xi xi s >= d1 - d2 s^2
/// for every scanned s and every xi in the Clarke interval there, with
/// d2 < margin * nu / gamma_norm^2.
struct PotentialCertificate {
    double c1 = 0.0, c2 = 0.0;
    double d1 = 0.0, d2 = 0.0;
    double scan_lo = 0.0, scan_hi = 0.0;
    int samples = 0;
    int n_mollify = 0;  ///< 0 when certifying the base potential
    double nu = 0.0, gamma_norm = 0.0, margin = 0.0;
};

PotentialCertificate certify(const Superpotential& j, const ScanSpec& scan, double nu,
                             double gamma_norm, double margin = 0.9);
PotentialCertificate certify(const MollifiedPotential& jn, const ScanSpec& scan, double nu,
                             double gamma_norm, double margin = 0.9);

struct StabilityRow {
    int n = 0;
    PotentialCertificate cert;
};

/// Per-n certificates plus the smallest N0 whose tail {n >= N0} keeps the
/// relative drift of all four constants below the threshold.
struct StabilityReport {
    PotentialCertificate base;
    std::vector<StabilityRow> rows;
    int n0 = 0;
    double drift_beyond_n0 = 0.0;
    double threshold = 0.0;
    bool converged = false;
};

StabilityReport constant_stability_scan(const Superpotential& j, const std::vector<int>& n_list,
                                        const ScanSpec& scan, double nu, double gamma_norm,
                                        double drift_threshold = 0.1, double margin = 0.9);

}  // namespace shearflow

#endif
