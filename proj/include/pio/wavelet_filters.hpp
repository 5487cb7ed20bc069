#pragma once

#include <array>

// Literal filter coefficient tables. The same numbers are shipped as plain
// text under data/filters/ (a unit test keeps header and files in sync), and
// the derivations live in tools/filter_design/.
namespace pio::filters {

// Daubechies-6 orthonormal scaling filter, 12 taps, sum = sqrt(2).
inline constexpr std::array<double, 12> db6 = {
    +1.11540743350109467e-01,
    +4.94623890398453059e-01,
    +7.51133908021095364e-01,
    +3.15250351709197629e-01,
    -2.26264693965439828e-01,
    -1.29766867567261940e-01,
    +9.75016055873230425e-02,
    +2.75228655303057269e-02,
    -3.15820393174860298e-02,
    +5.53842201161496126e-04,
    +4.77725751094551076e-03,
    -1.07730108530847959e-03,
};

// Biorthogonal near-symmetric pair for the first dual-tree level.
// h0: 13-tap analysis lowpass (exact dyadic rationals over 5120).
// g0: 19-tap synthesis lowpass, perfect-reconstruction complement of h0
//     with a zero at z = -1, normalized so conv(h0, g0) centers at 1/2.
inline constexpr std::array<double, 13> near_sym_h0 = {
    -1.75781250000000004e-03,
    +0.00000000000000000e+00,
    +2.22656250000000007e-02,
    -4.68750000000000000e-02,
    -4.82421874999999986e-02,
    +2.96875000000000000e-01,
    +5.55468749999999956e-01,
    +2.96875000000000000e-01,
    -4.82421874999999986e-02,
    -4.68750000000000000e-02,
    +2.22656250000000007e-02,
    +0.00000000000000000e+00,
    -1.75781250000000004e-03,
};

inline constexpr std::array<double, 19> near_sym_g0 = {
    +7.06262008569081840e-05,
    +0.00000000000000000e+00,
    -1.34189885225879046e-03,
    -1.88336535625342771e-03,
    +7.15680043915745481e-03,
    +2.38559888036159427e-02,
    -5.56430721089471100e-02,
    -5.16880632151747316e-02,
    +2.99757544321191949e-01,
    +5.59430879535635972e-01,
    +2.99757544321191949e-01,
    -5.16880632151747316e-02,
    -5.56430721089471100e-02,
    +2.38559888036159427e-02,
    +7.15680043915745481e-03,
    -1.88336535625342771e-03,
    -1.34189885225879046e-03,
    +0.00000000000000000e+00,
    +7.06262008569081840e-05,
};

// 14-tap quarter-shift orthonormal lowpass, tree a, for dual-tree levels >= 2.
// Paraunitary lattice design: H(1) = sqrt(2) and H(-1) = 0 hold exactly; the
// free parameters target quarter-sample group delay 6.25 plus stopband decay.
// Tree b is the time reverse; highpass mates are alternating-sign mirrors.
inline constexpr std::array<double, 14> qshift_h0a = {
    -4.55995571586642473e-02,
    +5.82555929033008475e-03,
    +8.50148671324073707e-02,
    -5.08950759467868968e-02,
    -1.07842533982907648e-01,
    +2.97412902346090358e-01,
    +7.48358515219992526e-01,
    +5.52423628063040240e-01,
    +3.65749046322052657e-02,
    -1.42291250386519685e-01,
    -1.15968744854514326e-02,
    +2.74304040971636541e-02,
    +2.19745982896474724e-03,
    +1.72006137232308363e-02,
};

}  // namespace pio::filters
