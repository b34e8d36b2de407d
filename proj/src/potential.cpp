#include "shearflow/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shearflow/detail/gauss.hpp"
#include "shearflow/error.hpp"

namespace shearflow {

namespace {

double poly_value(const std::vector<double>& c, double s) {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
    return v;
}

double poly_deriv(const std::vector<double>& c, double s) {
    double v = 0.0;
    for (int i = int(c.size()) - 1; i >= 1; --i) v = v * s + double(i) * c[i];
    return v;
}

double poly_deriv2(const std::vector<double>& c, double s) {
    double v = 0.0;
    for (int i = int(c.size()) - 1; i >= 2; --i) v = v * s + double(i) * double(i - 1) * c[i];
    return v;
}

double raw_bump(double t) {
    const double d = 1.0 - t * t;
    return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
}

double bump_normalizer() {
    static const double c = [] {
        const auto [x, w] = detail::gauss_legendre_01(200);
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * raw_bump(2.0 * x[i] - 1.0);
        return 1.0 / (2.0 * s);
    }();
    return c;
}

}  // namespace

double PotentialPiece::value(double s) const {
    double v = poly_value(poly, s);
    if (gauss_amp != 0.0) v += gauss_amp * std::exp(-0.5 * s * s);
    return v;
}

double PotentialPiece::deriv(double s) const {
    double v = poly_deriv(poly, s);
    if (gauss_amp != 0.0) v += gauss_amp * (-s) * std::exp(-0.5 * s * s);
    return v;
}

double PotentialPiece::deriv2(double s) const {
    double v = poly_deriv2(poly, s);
    if (gauss_amp != 0.0) v += gauss_amp * (s * s - 1.0) * std::exp(-0.5 * s * s);
    return v;
}

Superpotential Superpotential::quadratic() {
    Superpotential j;
    j.name = "quadratic";
    j.pieces.push_back(PotentialPiece{{0.0, 0.0, 0.5}, 0.0});
    return j;
}

Superpotential Superpotential::pressure_drop() {
    Superpotential j;
    j.name = "pressure_drop";
    j.breakpoints = {-1.0, 1.0};
    const PotentialPiece outer{{0.9, 0.0, 0.1}, 0.0};  // 1 + 0.1 (s^2 - 1)
    const PotentialPiece inner{{0.0, 0.0, 1.0}, 0.0};  // s^2
    j.pieces = {outer, inner, outer};
    return j;
}

Superpotential Superpotential::gaussian_well(double alpha) {
    Superpotential j;
    j.name = "gaussian_well";
    j.pieces.push_back(PotentialPiece{{0.0, 0.0, 0.5}, alpha});
    return j;
}

Superpotential Superpotential::piecewise(std::vector<double> breakpoints,
                                         std::vector<PotentialPiece> pieces, std::string name) {
    Superpotential j;
    j.name = std::move(name);
    j.breakpoints = std::move(breakpoints);
    j.pieces = std::move(pieces);
    j.validate();
    return j;
}

void Superpotential::validate() const {
    if (pieces.size() != breakpoints.size() + 1)
        throw Error(ErrorCode::ConfigType, "potential",
                    "piece count must be breakpoint count + 1", name);
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
        throw Error(ErrorCode::ConfigType, "potential", "breakpoints must be ascending", name);
    for (std::size_t b = 0; b < breakpoints.size(); ++b) {
        const double s = breakpoints[b];
        const double left = pieces[b].value(s);
        const double right = pieces[b + 1].value(s);
        const double scale = std::max({1.0, std::abs(left), std::abs(right)});
        if (std::abs(left - right) > 1e-12 * scale)
            throw Error(ErrorCode::ConfigType, "potential",
                        "pieces are discontinuous at a breakpoint",
                        "s=" + std::to_string(s));
    }
}

int Superpotential::piece_containing(double s) const {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
    return int(it - breakpoints.begin());
}

double Superpotential::value(double s) const { return pieces[piece_containing(s)].value(s); }
double Superpotential::deriv(double s) const { return pieces[piece_containing(s)].deriv(s); }
double Superpotential::deriv2(double s) const { return pieces[piece_containing(s)].deriv2(s); }

ClarkeInterval Superpotential::clarke(double s) const {
    // Exact breakpoint hit: hull of the one-sided derivative limits.
    const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), s);
    if (it != breakpoints.end() && *it == s) {
        const int b = int(it - breakpoints.begin());
        const double dl = pieces[b].deriv(s);
        const double dr = pieces[b + 1].deriv(s);
        return {std::min(dl, dr), std::max(dl, dr)};
    }
    const double d = deriv(s);
    return {d, d};
}

ClarkeInterval Superpotential::derivative_hull(double lo, double hi) const {
    if (lo > hi) std::swap(lo, hi);
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    const auto absorb = [&](const ClarkeInterval& c) {
        mn = std::min(mn, c.lo);
        mx = std::max(mx, c.hi);
    };
    absorb(clarke(lo));
    absorb(clarke(hi));
    for (double b : breakpoints)
        if (b > lo && b < hi) absorb(clarke(b));
    // Interior extrema of the piecewise derivative by dense sampling.
    const int samples = 128;
    for (int i = 1; i < samples; ++i)
        absorb(clarke(lo + (hi - lo) * double(i) / double(samples)));
    return {mn, mx};
}

ClarkeInterval clarke_interval(const Superpotential& j, double s) { return j.clarke(s); }

double bump_kernel(double t) { return bump_normalizer() * raw_bump(t); }

namespace {

// integral over u in (-1,1) of rho(u) f(r - u/n), split at the images of the
// breakpoints of f so every Gauss segment sees a smooth integrand.
template <typename F>
double convolve(const Superpotential& j, int n, int points, double r, F&& piece_eval) {
    std::vector<double> cuts = {-1.0, 1.0};
    for (double b : j.breakpoints) {
        const double u = double(n) * (r - b);
        if (u > -1.0 && u < 1.0) cuts.push_back(u);
    }
    std::sort(cuts.begin(), cuts.end());
    const auto [gx, gw] = detail::gauss_legendre_01(points);
    double total = 0.0;
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double a = cuts[seg], b = cuts[seg + 1];
        const double len = b - a;
        if (len <= 0.0) continue;
        double acc = 0.0;
        for (std::size_t q = 0; q < gx.size(); ++q) {
            const double u = a + len * gx[q];
            acc += gw[q] * bump_kernel(u) * piece_eval(r - u / double(n));
        }
        total += acc * len;
    }
    return total;
}

}  // namespace

double MollifiedPotential::value(double r) const {
    return convolve(base, n, quad_points, r, [&](double s) { return base.value(s); });
}

double MollifiedPotential::deriv(double r) const {
    return convolve(base, n, quad_points, r, [&](double s) { return base.deriv(s); });
}

double MollifiedPotential::deriv2(double r) const {
    return convolve(base, n, quad_points, r, [&](double s) { return base.deriv2(s); });
}

double MollifiedPotential::deriv_checked(double r, double tol, int max_points) const {
    int pts = quad_points;
    double prev = convolve(base, n, pts, r, [&](double s) { return base.deriv(s); });
    while (2 * pts <= max_points) {
        pts *= 2;
        const double next = convolve(base, n, pts, r, [&](double s) { return base.deriv(s); });
        const double scale = std::max(1.0, std::abs(next));
        if (std::abs(next - prev) <= tol * scale) return next;
        prev = next;
    }
    throw Error(ErrorCode::QuadratureBudgetExceeded, "potential",
                "convolution quadrature did not reach the requested tolerance",
                "r=" + std::to_string(r) + " tol=" + std::to_string(tol));
}

void MollifiedPotential::build_table(double lo, double hi, int samples) {
    table_lo_ = lo;
    table_hi_ = hi;
    table_h_ = (hi - lo) / double(samples - 1);
    table_f_.resize(samples);
    table_d_.resize(samples);
    for (int i = 0; i < samples; ++i) {
        const double r = lo + table_h_ * double(i);
        table_f_[i] = deriv(r);
        table_d_[i] = deriv2(r);
    }
}

double MollifiedPotential::deriv_fast(double r) const {
    if (table_f_.empty() || r < table_lo_ || r > table_hi_) return deriv(r);
    const double u = (r - table_lo_) / table_h_;
    int i = std::min(int(u), int(table_f_.size()) - 2);
    const double t = u - double(i);
    // Cubic Hermite with exact endpoint slopes (j_n'' by convolution).
    const double f0 = table_f_[i], f1 = table_f_[i + 1];
    const double d0 = table_d_[i] * table_h_, d1 = table_d_[i + 1] * table_h_;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * f1 +
           (t3 - t2) * d1;
}

MollifiedPotential mollify(const Superpotential& j, int n, int quad_points) {
    if (n < 1)
        throw Error(ErrorCode::ConfigType, "potential", "mollification index must be >= 1",
                    std::to_string(n));
    j.validate();
    MollifiedPotential jn;
    jn.base = j;
    jn.n = n;
    jn.quad_points = quad_points;
    return jn;
}

namespace {

struct EnvelopeSample {
    double s;
    double xi_abs;  ///< max |xi| over the Clarke interval at s
    double xi_s;    ///< min xi*s over the Clarke interval at s
};

// Scan grid: uniform over the range plus exact breakpoints plus a cluster
// around each breakpoint resolving the 1/n mollification scale.
std::vector<double> scan_points(const Superpotential& j, const ScanSpec& scan, int n) {
    std::vector<double> pts;
    pts.reserve(scan.samples + 200);
    for (int i = 0; i < scan.samples; ++i)
        pts.push_back(scan.lo + (scan.hi - scan.lo) * double(i) / double(scan.samples - 1));
    for (double b : j.breakpoints) {
        if (b < scan.lo || b > scan.hi) continue;
        pts.push_back(b);
        const double w = n > 0 ? 3.0 / double(n) : 0.1;
        for (int i = -64; i <= 64; ++i) {
            const double s = b + w * double(i) / 64.0;
            if (s >= scan.lo && s <= scan.hi) pts.push_back(s);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

PotentialCertificate fit_certificate(const std::vector<EnvelopeSample>& env, const ScanSpec& scan,
                                     double nu, double gamma_norm, double margin, int n_mollify,
                                     const std::string& name) {
    PotentialCertificate cert;
    cert.scan_lo = scan.lo;
    cert.scan_hi = scan.hi;
    cert.samples = int(env.size());
    cert.n_mollify = n_mollify;
    cert.nu = nu;
    cert.gamma_norm = gamma_norm;
    cert.margin = margin;

    const double tail = 0.5 * std::max(std::abs(scan.lo), std::abs(scan.hi));

    // Minimal growth slope from the outer part of the scan, then the offset.
    double c2 = 0.0;
    for (const auto& e : env)
        if (std::abs(e.s) >= tail) c2 = std::max(c2, e.xi_abs / std::abs(e.s));
    double c1 = 0.0;
    for (const auto& e : env) c1 = std::max(c1, e.xi_abs - c2 * std::abs(e.s));
    cert.c1 = std::max(c1, 1e-9);  // H(j)(b) wants c1 > 0
    cert.c2 = std::max(c2, 1e-9);

    // Quadratic tail requirement of the lower envelope of xi*s.
    double d2_req = 0.0;
    double witness = 0.0;
    for (const auto& e : env) {
        if (std::abs(e.s) < tail) continue;
        const double q = -e.xi_s / (e.s * e.s);
        if (q > d2_req) {
            d2_req = q;
            witness = e.s;
        }
    }
    const double ceiling = margin * nu / (gamma_norm * gamma_norm);
    if (d2_req >= ceiling)
        throw Error(ErrorCode::DissipativityViolated, "potential",
                    "no admissible d2 below " + std::to_string(ceiling) + " for " + name,
                    "s=" + std::to_string(witness) + " needs d2>=" + std::to_string(d2_req));
    const double d2_floor = std::min(1e-6, 0.5 * ceiling);
    cert.d2 = std::max(d2_req, d2_floor);

    double d1 = std::numeric_limits<double>::infinity();
    for (const auto& e : env) d1 = std::min(d1, e.xi_s + cert.d2 * e.s * e.s);
    cert.d1 = std::min(d1, 0.0);  // xi*s vanishes at s=0, so d1 <= 0 always holds

    return cert;
}

}  // namespace

PotentialCertificate certify(const Superpotential& j, const ScanSpec& scan, double nu,
                             double gamma_norm, double margin) {
    j.validate();
    std::vector<EnvelopeSample> env;
    for (double s : scan_points(j, scan, 0)) {
        const ClarkeInterval c = j.clarke(s);
        env.push_back({s, std::max(std::abs(c.lo), std::abs(c.hi)), std::min(c.lo * s, c.hi * s)});
    }
    return fit_certificate(env, scan, nu, gamma_norm, margin, 0, j.name);
}

PotentialCertificate certify(const MollifiedPotential& jn, const ScanSpec& scan, double nu,
                             double gamma_norm, double margin) {
    std::vector<EnvelopeSample> env;
    for (double s : scan_points(jn.base, scan, jn.n)) {
        const double xi = jn.deriv(s);
        env.push_back({s, std::abs(xi), xi * s});
    }
    return fit_certificate(env, scan, nu, gamma_norm, margin, jn.n, jn.base.name);
}

StabilityReport constant_stability_scan(const Superpotential& j, const std::vector<int>& n_list,
                                        const ScanSpec& scan, double nu, double gamma_norm,
                                        double drift_threshold, double margin) {
    if (n_list.empty())
        throw Error(ErrorCode::ConfigType, "potential", "n_list must be nonempty");
    StabilityReport report;
    report.threshold = drift_threshold;
    report.base = certify(j, scan, nu, gamma_norm, margin);
    for (int n : n_list)
        report.rows.push_back({n, certify(mollify(j, n), scan, nu, gamma_norm, margin)});

    const auto drift_from = [&](std::size_t first) {
        double worst = 0.0;
        const auto one = [&](auto pick) {
            double mn = std::numeric_limits<double>::infinity(), mx = -mn;
            for (std::size_t i = first; i < report.rows.size(); ++i) {
                const double x = pick(report.rows[i].cert);
                mn = std::min(mn, x);
                mx = std::max(mx, x);
            }
            const double denom = std::max({1e-12, std::abs(mn), std::abs(mx)});
            worst = std::max(worst, (mx - mn) / denom);
        };
        one([](const PotentialCertificate& c) { return c.c1; });
        one([](const PotentialCertificate& c) { return c.c2; });
        one([](const PotentialCertificate& c) { return c.d1; });
        one([](const PotentialCertificate& c) { return c.d2; });
        return worst;
    };

    report.n0 = report.rows.back().n;
    report.drift_beyond_n0 = drift_from(report.rows.size() - 1);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const double d = drift_from(i);
        if (d < drift_threshold) {
            report.n0 = report.rows[i].n;
            report.drift_beyond_n0 = d;
            report.converged = true;
            break;
        }
    }
    return report;
}

}  // namespace shearflow
