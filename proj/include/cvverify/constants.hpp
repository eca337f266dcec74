#pragma once
// pinned calibration constants; regenerate with tools/calibrate_kinf

namespace cvv {

// max of  max_x sum_{k,l<C} |P_kl(x)| / C^{10/3}  (C <= 8)
// and     max_x |P_kl(x)| / max(k,l,1)^{10/3}       (k,l <= 6), |x| <= 12 step 1e-3
inline constexpr double kKInf = 2.074;
inline constexpr int kKInfMaxC = 8;

}  // namespace cvv
