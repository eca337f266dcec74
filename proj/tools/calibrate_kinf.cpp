// fits the homodyne range constant pinned in include/cvverify/constants.hpp
#include "cvverify/constants.hpp"
#include "cvverify/estimators.hpp"

#include <cmath>
#include <cstdio>

using namespace cvv;

int main() {
    const double step = 1e-3, xmax = 12.0;
    double k_sum = 0, k_elem = 0;
    for (int C = 1; C <= kKInfMaxC; ++C) {
        double worst = 0;
        for (double x = -xmax; x <= xmax; x += step) worst = std::max(worst, hom_pattern_table(C, x).cwiseAbs().sum());
        double r = worst / std::pow(C, 10.0 / 3.0);
        std::printf("C=%d  max_x sum|P_kl| = %.6f  ratio = %.6f\n", C, worst, r);
        k_sum = std::max(k_sum, r);
    }
    for (int k = 0; k <= 6; ++k)
        for (int l = k; l <= 6; ++l) {
            double worst = 0;
            for (double x = -xmax; x <= xmax; x += step) worst = std::max(worst, std::abs(hom_pattern(k, l, x)));
            double r = worst / std::pow(std::max({k, l, 1}), 10.0 / 3.0);
            k_elem = std::max(k_elem, r);
        }
    std::printf("sum ratio %.6f  element ratio %.6f\n", k_sum, k_elem);
    double fit = std::ceil(std::max(k_sum, k_elem) * 1000) / 1000;
    std::printf("K_inf = %.3f (pinned %.3f)\n", fit, kKInf);
    return fit <= kKInf ? 0 : 1;
}
