#include "eoqt/models/bell.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "eoqt/common.hpp"

namespace eoqt::bell {

double sigma(double s) {
    // (1+x)ln(1+x) + s x with x = e^{-s}, arranged to avoid cancellation for s < 0.
    double num;
    if (s >= 0.0) {
        const double x = std::exp(-s);
        num = std::log1p(x) + x * (std::log1p(x) + s);
    } else {
        const double y = std::exp(s);
        const double ly = std::log1p(y);
        num = -s + ly + (y > 0.0 ? ly / y : 1.0);
    }
    return num / (2.0 * kLn2);
}

double eaee_number(double gamma_t) {
    if (gamma_t < 0.0) throw std::invalid_argument("negative time");
    return sigma(2.0 * gamma_t);
}

double eaee_homodyne(double tau, double tol) {
    if (tau < 0.0) throw std::invalid_argument("negative time");
    if (tau == 0.0) return sigma(0.0);
    const double mu = 2.0 * tau;
    const double sd = 2.0 * std::sqrt(tau);
    auto f = [&](double x) {
        const double w = std::exp(-0.5 * x * x);
        return w > 0.0 ? sigma(mu + sd * x) * w / std::sqrt(2.0 * M_PI) : 0.0;
    };
    const double inf = std::numeric_limits<double>::infinity();
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -inf, inf, 15, tol, &err);
    return v;
}

double homodyne_tau(double gamma_t, double phi1, double phi2) {
    const double c1 = std::cos(phi1), c2 = std::cos(phi2);
    return gamma_t * (c1 * c1 + c2 * c2);
}

double entanglement_of_formation(double gamma_t) {
    if (gamma_t < 0.0) throw std::invalid_argument("negative time");
    const double rp = 0.5 * (1.0 + std::sqrt(-std::expm1(-2.0 * gamma_t)));
    return binary_entropy(rp);
}

}  // namespace eoqt::bell
