#include "cvverify/common.hpp"

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace cvv {

double log_factorial(int n) {
    if (n < 0) throw ConfigError("log_factorial: negative argument");
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double factorial(int n) {
    if (n < 0) throw ConfigError("factorial: negative argument");
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

double binom(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r < 1e15 ? std::round(r) : r;
}

std::size_t total_dim(const std::vector<int>& cutoffs) {
    std::size_t d = 1;
    for (int c : cutoffs) {
        if (c < 1) throw ConfigError("cutoff must be >= 1");
        d *= static_cast<std::size_t>(c);
    }
    return d;
}

std::vector<std::size_t> strides(const std::vector<int>& cutoffs) {
    std::vector<std::size_t> s(cutoffs.size(), 1);
    for (int i = static_cast<int>(cutoffs.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * cutoffs[i + 1];
    return s;
}

std::size_t flat_index(const Index& idx, const std::vector<int>& cutoffs) {
    if (idx.size() != cutoffs.size()) throw ConfigError("index length does not match mode count");
    std::size_t f = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= cutoffs[i]) throw ConfigError("index outside cutoff");
        f = f * cutoffs[i] + idx[i];
    }
    return f;
}

Index multi_index(std::size_t flat, const std::vector<int>& cutoffs) {
    Index idx(cutoffs.size());
    for (int i = static_cast<int>(cutoffs.size()) - 1; i >= 0; --i) {
        idx[i] = static_cast<int>(flat % cutoffs[i]);
        flat /= cutoffs[i];
    }
    return idx;
}

int photon_number(const Index& idx) {
    int n = 0;
    for (int v : idx) n += v;
    return n;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    std::uint64_t t = a ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
    return splitmix64(t);
}

int thread_count() {
    if (const char* env = std::getenv("CVVERIFY_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : static_cast<int>(h);
}

void parallel_blocks(std::size_t nblocks, const std::function<void(std::size_t)>& fn) {
    int nt = std::min<std::size_t>(thread_count(), nblocks == 0 ? 1 : nblocks);
    if (nt <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex mu;
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t b = t; b < nblocks; b += nt) fn(b);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw ConfigError("linspace: need at least one point");
    std::vector<double> r(n);
    if (n == 1) {
        r[0] = a;
        return r;
    }
    for (int i = 0; i < n; ++i) r[i] = a + (b - a) * i / (n - 1);
    r[n - 1] = b;
    return r;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1, p2 = 0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
    }
}

}  // namespace cvv
