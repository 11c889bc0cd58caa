#include "mfrm/special.hpp"

#include <cmath>
#include <limits>

#include "mfrm/errors.hpp"

namespace mfrm {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

// log P(a, x) by the power series, valid for x < a + 1
double log_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    return std::log(sum) - x + a * std::log(x) - std::lgamma(a);
}

// log Q(a, x) by Lentz's continued fraction, valid for x >= a + 1
double log_q_fraction(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return std::log(h) - x + a * std::log(x) - std::lgamma(a);
}

}  // namespace

double log_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) throw NumericalError("log_gamma_p: bad arguments");
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return log_p_series(a, x);
    return std::log1p(-std::exp(log_q_fraction(a, x)));
}

double log_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || std::isnan(x)) throw NumericalError("log_gamma_q: bad arguments");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
    if (x < a + 1.0) return std::log1p(-std::exp(log_p_series(a, x)));
    return log_q_fraction(a, x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_normal_cdf(double x) {
    if (x > -30.0) return std::log(normal_cdf(x));
    // asymptotic tail expansion
    double x2 = x * x;
    return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * M_PI) +
           std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

}  // namespace mfrm
