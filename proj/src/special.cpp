#include "cvverify/special.hpp"

#include <cmath>

namespace cvv {

std::vector<double> hermite_functions(int nmax, double x) {
    if (nmax < 0) return {};
    std::vector<double> u(nmax + 1);
    u[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    if (nmax >= 1) u[1] = std::sqrt(2.0) * x * u[0];
    for (int n = 1; n < nmax; ++n)
        u[n + 1] = std::sqrt(2.0 / (n + 1)) * x * u[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * u[n - 1];
    return u;
}

double hermite_function(int n, double x) { return hermite_functions(n, x)[n]; }

namespace {

// even series h0 with parameter K (K = 2j+1):
//   1 + sum_n prod_{i<n}(4i+1-K)/(2n)! x^{2n}
// odd series h1: x + sum_n prod_{i<n}(4i+3-K)/(2n+1)! x^{2n+1}
// terms built incrementally; compensated summation
double h_series(int K, double x, bool odd) {
    double x2 = x * x;
    double term = odd ? x : 1.0;
    double sum = term, comp = 0.0;
    for (int n = 1; n < 20000; ++n) {
        double num = odd ? (4.0 * (n - 1) + 3 - K) : (4.0 * (n - 1) + 1 - K);
        double den = odd ? (2.0 * n + 1) * (2.0 * n) : (2.0 * n) * (2.0 * n - 1);
        term *= num / den * x2;
        double y = term - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (term == 0.0) break;
        if (n > K && std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

double v_norm(int l) {
    double m = std::pow(kPi, 0.25);
    for (int j = 0; j < l; ++j) m = (j % 2 == 0) ? -m / std::sqrt(2.0 * (j + 1)) : m * std::sqrt(2.0 * (j + 1));
    return m;
}

void check_window(double x) {
    if (!(std::abs(x) <= kSeriesWindow))
        throw NumericalError("oscillator series evaluated outside |x| <= 20; use the asymptotic branch");
}

}  // namespace

double ho_u_series(int j, double x) {
    if (j < 0) throw ConfigError("eigenfunction index must be >= 0");
    check_window(x);
    if (std::abs(x) > 6.0) return hermite_function(j, x);
    int K = 2 * j + 1;
    int m = j / 2;
    double norm = std::pow(std::pow(2.0, j) * factorial(j) * std::sqrt(kPi), -0.5);
    double lead;  // H_j(0) or H_j'(0)
    if (j % 2 == 0) {
        lead = ((m % 2) ? -1.0 : 1.0) * factorial(2 * m) / factorial(m);
        return norm * lead * std::exp(-0.5 * x * x) * h_series(K, x, false);
    }
    lead = ((m % 2) ? -1.0 : 1.0) * 2.0 * factorial(2 * m + 1) / factorial(m);
    return norm * lead * std::exp(-0.5 * x * x) * h_series(K, x, true);
}

double ho_v(int j, double x) {
    if (j < 0) throw ConfigError("eigenfunction index must be >= 0");
    check_window(x);
    int K = 2 * j + 1;
    // v uses the series of opposite parity to u
    return v_norm(j) * std::exp(-0.5 * x * x) * h_series(K, x, j % 2 == 0);
}

std::vector<double> ho_v_all(int nmax, double x) {
    std::vector<double> v(nmax + 1);
    for (int j = 0; j <= nmax; ++j) v[j] = ho_v(j, x);
    return v;
}

HoPair ho_eigenfunctions(int j, double x) { return {ho_u_series(j, x), ho_v(j, x)}; }

double genlaguerre(int n, double a, double x) {
    if (n < 0) return 0.0;
    if (n == 0) return 1.0;
    double l0 = 1.0, l1 = 1.0 + a - x;
    for (int k = 1; k < n; ++k) {
        double l2 = ((2.0 * k + 1 + a - x) * l1 - (k + a) * l0) / (k + 1);
        l0 = l1;
        l1 = l2;
    }
    return l1;
}

double tpow_genlaguerre(int n, int a, double t) {
    double x = t * t;
    if (a >= 0) return std::pow(t, a) * genlaguerre(n, a, x);
    int m = -a;
    if (m > n) throw ConfigError("tpow_genlaguerre: order -a larger than degree");
    // L_n^{(-m)}(x) = (-x)^m (n-m)!/n! L_{n-m}^{(m)}(x)
    // t^{-m} (-t^2)^m = (-1)^m t^m
    double sign = (m % 2) ? -1.0 : 1.0;
    return sign * std::pow(t, m) * std::exp(log_factorial(n - m) - log_factorial(n)) * genlaguerre(n - m, m, x);
}

cplx laguerre_2d(int a, int b, cplx z) {
    if (a < 0 || b < 0) throw ConfigError("laguerre_2d: negative index");
    // z^{b-p} zbar^{a-p} = z^{b-q} zbar^{a-q} |z|^{2(q-p)}: Horner in |z|^2
    int q = std::min(a, b);
    double w = std::norm(z);
    double c = std::exp(-0.5 * (log_factorial(a) + log_factorial(b)));
    double acc = c;
    for (int p = 0; p < q; ++p) {
        c *= -double(a - p) * double(b - p) / double(p + 1);
        acc = acc * w + c;
    }
    cplx u = b > a ? z : std::conj(z), pw = 1.0;
    for (int i = 0; i < std::abs(a - b); ++i) pw *= u;
    return acc * pw;
}

double laguerre_2d_envelope(int a, int b, double c) {
    if (!(c > 0)) throw ConfigError("laguerre_2d_envelope: decay must be positive");
    // |L_{a,b}(r e^{i phi})| depends on r only
    auto f = [&](double r) { return std::exp(-c * r * r) * std::abs(laguerre_2d(a, b, cplx(r, 0.0))); };
    double rmax = std::sqrt((a + b + 10.0) / c) + 5.0;
    int n = 4000;
    double best = f(0.0), rb = 0.0;
    for (int i = 1; i <= n; ++i) {
        double r = rmax * i / n;
        double v = f(r);
        if (v > best) {
            best = v;
            rb = r;
        }
    }
    // golden refine around the grid max
    double lo = std::max(0.0, rb - rmax / n), hi = rb + rmax / n;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80; ++it) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    return std::max({best, f1, f2});
}

}  // namespace cvv
