#pragma once
// scalar special functions: oscillator eigenfunctions, Laguerre polynomials, 2D Laguerre

#include "cvverify/common.hpp"

namespace cvv {

// window where the v_j power series is trusted (|x| beyond this throws)
inline constexpr double kSeriesWindow = 20.0;

// u_0..u_nmax at x, three-term recurrence (stable everywhere)
std::vector<double> hermite_functions(int nmax, double x);
double hermite_function(int n, double x);

// power-series (h0/h1) form of u_j, used for |x| <= 6; recurrence beyond
double ho_u_series(int j, double x);
// unnormalisable solution v_j, power series only
double ho_v(int j, double x);
// v_0..v_nmax
std::vector<double> ho_v_all(int nmax, double x);

struct HoPair {
    double u;
    double v;
};
HoPair ho_eigenfunctions(int j, double x);

// generalized Laguerre L_n^{(a)}(x), a > -1 or integer a with n+a >= 0 via reflection
double genlaguerre(int n, double a, double x);
// t^a L_n^{(a)}(t^2) for integer a (possibly negative), finite at t = 0
double tpow_genlaguerre(int n, int a, double t);

// paper form: L_{a,b}(z) = sum_p sqrt(a!b!)(-1)^p/(p!(a-p)!(b-p)!) z^{b-p} conj(z)^{a-p}
cplx laguerre_2d(int a, int b, cplx z);

// sup over w of exp(-c|w|^2) |L_{a,b}(w)| (radial maximisation), c > 0
double laguerre_2d_envelope(int a, int b, double c);

}  // namespace cvv
