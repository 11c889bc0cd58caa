#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mfrm/errors.hpp"
#include "mfrm/randdist.hpp"

namespace mfrm {

namespace {

constexpr int kMaxUpdates = 10000;
constexpr int kPlainTries = 4;

// Log density of W = log(xi X + 1) for X ~ IG(a, b), up to a constant.
struct TransformedInvGamma {
    double a, b, xi;
    double logf(double w) const {
        double e = std::expm1(w);
        return -(a + 1.0) * std::log(e) + w - b * xi / e;
    }
    double dlogf(double w) const {
        double e = std::expm1(w), ew = e + 1.0;
        return -(a + 1.0) * ew / e + 1.0 + b * xi * ew / (e * e);
    }
};

struct Envelope {
    double lo, hi;
    std::vector<double> x, h, dh;
    std::vector<double> zs;        // breakpoints, size x.size() + 1
    std::vector<double> logmass;   // per piece

    void insert(double xn, double hn, double dhn) {
        auto it = std::lower_bound(x.begin(), x.end(), xn);
        auto k = it - x.begin();
        x.insert(it, xn);
        h.insert(h.begin() + k, hn);
        dh.insert(dh.begin() + k, dhn);
        rebuild();
    }

    void rebuild() {
        const std::size_t k = x.size();
        zs.assign(k + 1, 0.0);
        zs[0] = lo;
        zs[k] = hi;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            double d = dh[i] - dh[i + 1];
            double z;
            if (std::abs(d) < 1e-12 * (std::abs(dh[i]) + 1.0))
                z = 0.5 * (x[i] + x[i + 1]);
            else
                z = (h[i + 1] - h[i] - x[i + 1] * dh[i + 1] + x[i] * dh[i]) / d;
            zs[i + 1] = std::clamp(z, x[i], x[i + 1]);
        }
        logmass.assign(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) logmass[i] = piece_logmass(i);
    }

    double tangent(std::size_t i, double w) const { return h[i] + dh[i] * (w - x[i]); }

    double piece_logmass(std::size_t i) const {
        double a = zs[i], b = zs[i + 1], s = dh[i], len = b - a;
        if (len <= 0.0) return -std::numeric_limits<double>::infinity();
        if (std::abs(s) * len < 1e-10) return tangent(i, 0.5 * (a + b)) + std::log(len);
        if (s > 0.0) return tangent(i, b) + std::log(-std::expm1(-s * len) / s);
        return tangent(i, a) + std::log(-std::expm1(s * len) / -s);
    }

    double upper(double w) const {
        std::size_t i = std::upper_bound(zs.begin() + 1, zs.end() - 1, w) - (zs.begin() + 1);
        return tangent(i, w);
    }

    double lower(double w) const {
        if (w < x.front() || w > x.back()) return -std::numeric_limits<double>::infinity();
        std::size_t i = std::upper_bound(x.begin(), x.end(), w) - x.begin();
        if (i == x.size()) return h.back();
        if (i == 0) return h.front();
        double t = (w - x[i - 1]) / (x[i] - x[i - 1]);
        return (1.0 - t) * h[i - 1] + t * h[i];
    }

    double sample(Rng& rng) const {
        double mx = *std::max_element(logmass.begin(), logmass.end());
        double total = 0.0;
        for (double lm : logmass) total += std::exp(lm - mx);
        double u = rng.uniform() * total, acc = 0.0;
        std::size_t i = 0;
        for (; i + 1 < logmass.size(); ++i) {
            acc += std::exp(logmass[i] - mx);
            if (u < acc) break;
        }
        double a = zs[i], b = zs[i + 1], s = dh[i], len = b - a;
        double v = rng.uniform();
        if (std::abs(s) * len < 1e-10) return a + v * len;
        double w = s > 0.0 ? b + std::log1p(v * std::expm1(-s * len)) / s
                           : a + std::log1p(v * std::expm1(s * len)) / s;
        return std::clamp(w, a, b);
    }
};

// Wilson-Hilferty approximation to the Gamma(a, 1) quantile.
double gamma_quantile_approx(double a, double z) {
    double c = 1.0 / (9.0 * a);
    double v = 1.0 - c + z * std::sqrt(c);
    if (v <= 0.0) v = 1e-3;
    return a * v * v * v;
}

}  // namespace

double sample_trunc_inv_gamma(double a, double b, double upper, Rng& rng) {
    if (!(a > 0.0) || !(b > 0.0) || !(upper > 0.0))
        throw NumericalError("sample_trunc_inv_gamma: nonpositive parameter");
    const double xi = 2.0 * (a + 1.0) / b;
    TransformedInvGamma f{a, b, xi};
    if (std::isinf(upper)) return sample_inv_gamma(a, b, rng);
    // cheap path when the bound cuts little mass; exact either way since the
    // fallback does not depend on why these tries failed
    for (int t = 0; t < kPlainTries; ++t) {
        double x = sample_inv_gamma(a, b, rng);
        if (x < upper) return x;
    }
    Envelope env;
    env.x.reserve(32);
    env.h.reserve(32);
    env.dh.reserve(32);
    env.lo = 0.0;
    env.hi = std::log1p(xi * upper);

    // abscissae from quantiles of the untruncated law, mapped into W and kept inside the support
    const double zq[5] = {-1.6, -0.8, 0.0, 0.8, 1.6};
    std::vector<double> init;
    for (double z : zq) {
        double x = b / gamma_quantile_approx(a, -z);
        double w = std::log1p(xi * x);
        init.push_back(w);
    }
    std::sort(init.begin(), init.end());
    const double hi = env.hi;
    for (double& w : init) {
        if (!(w < hi)) w = hi;
        w = std::min(w, hi * (1.0 - 1e-9));
        w = std::max(w, 1e-12 * hi);
    }
    // spread collapsed points across the support
    init.erase(std::unique(init.begin(), init.end(),
                           [](double u, double v) { return std::abs(u - v) < 1e-12 * (1.0 + std::abs(u)); }),
               init.end());
    if (init.size() < 3) {
        init.clear();
        for (int k = 1; k <= 5; ++k) init.push_back(hi * k / 6.0);
    }
    for (double w : init) {
        double hw = f.logf(w), dw = f.dlogf(w);
        if (!std::isfinite(hw) || !std::isfinite(dw)) continue;
        env.x.push_back(w);
        env.h.push_back(hw);
        env.dh.push_back(dw);
    }
    if (env.x.empty()) throw NumericalError("sample_trunc_inv_gamma: could not start envelope");
    env.rebuild();

    for (int it = 0; it < kMaxUpdates; ++it) {
        double w = env.sample(rng);
        double u = std::log(rng.uniform());
        double up = env.upper(w);
        if (u <= env.lower(w) - up) return std::expm1(w) / xi;
        double hw = f.logf(w);
        if (u <= hw - up) {
            double x = std::expm1(w) / xi;
            if (x > 0.0 && x < upper) return x;
        }
        double dw = f.dlogf(w);
        if (std::isfinite(hw) && std::isfinite(dw) && w > 0.0) env.insert(w, hw, dw);
    }
    throw NumericalError("sample_trunc_inv_gamma: envelope update cap reached");
}

}  // namespace mfrm
