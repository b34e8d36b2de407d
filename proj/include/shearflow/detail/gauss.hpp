#ifndef SHEARFLOW_DETAIL_GAUSS_HPP
#define SHEARFLOW_DETAIL_GAUSS_HPP

#include <cmath>
#include <utility>
#include <vector>

namespace shearflow::detail {

/// Gauss-Legendre rule on (0,1): exact for polynomials of degree 2n-1.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_01(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-like initial guess on (-1,1).
        double t = std::cos(M_PI * (double(i) + 0.75) / (double(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / double(k);
                p0 = p1;
                p1 = p2;
            }
            dp = double(n) * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[n - 1 - i] = 0.5 * (t + 1.0);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    return {x, w};
}

}  // namespace shearflow::detail

#endif
