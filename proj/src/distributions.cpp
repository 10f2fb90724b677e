#include "delaycode/distributions.hpp"

#include <cmath>
#include <limits>

#include "delaycode/error.hpp"

namespace delaycode::dist {

namespace {

constexpr double kEps = 1e-15;
constexpr int kMaxIter = 10000;
constexpr double kTiny = 1e-300;

double gamma_series(double a, double x) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the Lentz continued fraction.
double gamma_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_cf(double a, double b, double x) {
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return h;
}

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

double gamma_p(double a, double x) {
    require(a > 0.0 && x >= 0.0 && std::isfinite(x), "gamma_p needs a > 0 and finite x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_cf(a, x);
}

double gamma_q(double a, double x) {
    require(a > 0.0 && x >= 0.0 && std::isfinite(x), "gamma_q needs a > 0 and finite x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_cf(a, x);
}

double beta_i(double a, double b, double x) {
    require(a > 0.0 && b > 0.0 && x >= 0.0 && x <= 1.0, "beta_i needs a, b > 0 and 0 <= x <= 1");
    if (x == 0.0 || x == 1.0) return x;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double chi2_sf(double x, double df) {
    require(df > 0.0, "chi-square needs df > 0");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return gamma_q(df / 2.0, x / 2.0);
}

double chi2_cdf(double x, double df) { return 1.0 - chi2_sf(x, df); }

double t_sf(double t, double df) {
    require(df > 0.0, "Student t needs df > 0");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double tail = 0.5 * beta_i(df / 2.0, 0.5, df / (df + t * t));
    return t >= 0.0 ? tail : 1.0 - tail;
}

double t_two_sided(double t, double df) {
    require(df > 0.0, "Student t needs df > 0");
    if (std::isinf(t)) return 0.0;
    return beta_i(df / 2.0, 0.5, df / (df + t * t));
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double studentized_range_cdf(double q, int k) {
    require(k >= 2, "studentized range needs k >= 2");
    if (q <= 0.0) return 0.0;
    if (std::isinf(q)) return 1.0;
    // composite Simpson on [-9, 9 + q]; the integrand is smooth and negligible outside
    const double lo = -9.0, hi = 9.0 + q;
    const int n = 4000;
    const double h = (hi - lo) / n;
    auto f = [&](double z) {
        const double inner = normal_cdf(z) - normal_cdf(z - q);
        return normal_pdf(z) * std::pow(inner, k - 1);
    };
    double sum = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    const double p = k * sum * h / 3.0;
    return std::min(1.0, std::max(0.0, p));
}

double studentized_range_quantile(double p, int k) {
    require(p > 0.0 && p < 1.0, "quantile needs 0 < p < 1");
    double lo = 0.0, hi = 1.0;
    while (studentized_range_cdf(hi, k) < p) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (studentized_range_cdf(mid, k) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double nemenyi_table_q(double alpha, int k) {
    static constexpr double q05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
    static constexpr double q10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};
    if (k < 2 || k > 10) return 0.0;
    if (std::fabs(alpha - 0.05) < 1e-12) return q05[k - 2];
    if (std::fabs(alpha - 0.10) < 1e-12) return q10[k - 2];
    return 0.0;
}

double nemenyi_q(double alpha, int k) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    require(k >= 2, "Nemenyi needs k >= 2");
    const double q = studentized_range_quantile(1.0 - alpha, k) / std::sqrt(2.0);
    if (std::isfinite(q) && q > 0.0) return q;
    const double t = nemenyi_table_q(alpha, k);
    if (t == 0.0) throw ConfigError("no critical value for this alpha and k");
    return t;
}

}  // namespace delaycode::dist
