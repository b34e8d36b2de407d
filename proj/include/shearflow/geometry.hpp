#ifndef SHEARFLOW_GEOMETRY_HPP
#define SHEARFLOW_GEOMETRY_HPP

#include <cstdint>
#include <vector>

namespace shearflow {

/// Smooth positive L-periodic height profile h(x1), either constant or a
/// truncated trigonometric series
///   h(x) = mean + sum_k a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L).
struct HeightProfile {
    double mean = 1.0;
    std::vector<double> cos_coeffs;  ///< a_1, a_2, ...
    std::vector<double> sin_coeffs;  ///< b_1, b_2, ...

    bool is_constant() const { return cos_coeffs.empty() && sin_coeffs.empty(); }

    double value(double x1, double L) const;
    double deriv(double x1, double L) const;   ///< h'(x1)
    double deriv2(double x1, double L) const;  ///< h''(x1)
};

/// Tensor quadrature rule: uniform (trapezoid/rectangle, spectrally accurate
/// for periodic integrands) in x1, Gauss-Legendre in the mapped wall-normal
/// coordinate eta = x2/h(x1). Zero means auto-select from (K, M) at basis build.
struct QuadratureSpec {
    int nx1 = 0;
    int nx2 = 0;
};

/// Periodic channel 0 < x1 < L, 0 < x2 < h(x1). Gamma0 is the flat bottom
/// wall x2 = 0, Gamma1 the top wall x2 = h(x1).
struct ChannelGeometry {
    double L = 0.0;
    HeightProfile h;
    double h0 = 0.0;  ///< min of h over [0, L]
    QuadratureSpec quadrature;

    double height(double x1) const { return h.value(x1, L); }
    double height_deriv(double x1) const { return h.deriv(x1, L); }
    double height_deriv2(double x1) const { return h.deriv2(x1, L); }

    /// Measure of the bottom wall (flat, so just L).
    double gamma0_measure() const { return L; }
    /// Area of Omega = integral of h.
    double area() const;

    /// Stable content hash over (L, h, quadrature); basis caches key off this.
    std::uint64_t content_hash() const;
};

/// Validates positivity and builds the geometry record (h0 from a dense
/// sampling grid). Throws BadPeriod if L <= 0, NonPositiveHeight if
/// min h <= 0 on the sampling grid.
ChannelGeometry build_channel(double L, const HeightProfile& h_spec, QuadratureSpec quad = {});

}  // namespace shearflow

#endif
