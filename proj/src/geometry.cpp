#include "shearflow/geometry.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "shearflow/error.hpp"

namespace shearflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_double(double x, std::uint64_t h) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    return fnv1a(&bits, sizeof(bits), h);
}
}  // namespace

double HeightProfile::value(double x1, double L) const {
    double h = mean;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k)
        h += cos_coeffs[k] * std::cos(kTwoPi * double(k + 1) * x1 / L);
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k)
        h += sin_coeffs[k] * std::sin(kTwoPi * double(k + 1) * x1 / L);
    return h;
}

double HeightProfile::deriv(double x1, double L) const {
    double d = 0.0;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
        const double w = kTwoPi * double(k + 1) / L;
        d -= cos_coeffs[k] * w * std::sin(w * x1);
    }
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
        const double w = kTwoPi * double(k + 1) / L;
        d += sin_coeffs[k] * w * std::cos(w * x1);
    }
    return d;
}

double HeightProfile::deriv2(double x1, double L) const {
    double d = 0.0;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
        const double w = kTwoPi * double(k + 1) / L;
        d -= cos_coeffs[k] * w * w * std::cos(w * x1);
    }
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
        const double w = kTwoPi * double(k + 1) / L;
        d -= sin_coeffs[k] * w * w * std::sin(w * x1);
    }
    return d;
}

double ChannelGeometry::area() const {
    // Trapezoid on the period is exact for the truncated trig series once the
    // node count exceeds the highest harmonic.
    const int n = 64 + 4 * int(std::max(h.cos_coeffs.size(), h.sin_coeffs.size()));
    double a = 0.0;
    for (int i = 0; i < n; ++i) a += height(L * double(i) / double(n));
    return a * L / double(n);
}

std::uint64_t ChannelGeometry::content_hash() const {
    std::uint64_t h64 = hash_double(L, 0xcbf29ce484222325ULL);
    h64 = hash_double(h.mean, h64);
    for (double c : h.cos_coeffs) h64 = hash_double(c, h64);
    h64 = fnv1a("|", 1, h64);
    for (double c : h.sin_coeffs) h64 = hash_double(c, h64);
    h64 = fnv1a(&quadrature.nx1, sizeof(int), h64);
    h64 = fnv1a(&quadrature.nx2, sizeof(int), h64);
    return h64;
}

ChannelGeometry build_channel(double L, const HeightProfile& h_spec, QuadratureSpec quad) {
    if (!(L > 0.0) || !std::isfinite(L))
        throw Error(ErrorCode::BadPeriod, "geometry", "period L must be positive", std::to_string(L));

    ChannelGeometry geom;
    geom.L = L;
    geom.h = h_spec;
    geom.quadrature = quad;

    // h0 from a dense sampling grid; resolution scales with the harmonic content.
    const int harmonics = int(std::max(h_spec.cos_coeffs.size(), h_spec.sin_coeffs.size()));
    const int n = h_spec.is_constant() ? 1 : std::max(20001, 2048 * (harmonics + 1) + 1);
    double h0 = std::numeric_limits<double>::infinity();
    double argmin = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = L * double(i) / double(n);
        const double hx = h_spec.value(x, L);
        if (hx < h0) {
            h0 = hx;
            argmin = x;
        }
    }
    if (!(h0 > 0.0))
        throw Error(ErrorCode::NonPositiveHeight, "geometry",
                    "height profile is not positive on [0, L]",
                    "h(" + std::to_string(argmin) + ") = " + std::to_string(h0));
    geom.h0 = h0;
    return geom;
}

}  // namespace shearflow
