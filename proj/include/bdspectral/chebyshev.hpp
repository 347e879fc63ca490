#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bdspectral/chain.hpp"

namespace bdspectral {

/// Chebyshev polynomial of the first kind, T_j(t), by the three-term
/// recurrence T_{j+1} = 2t T_j - T_{j-1}.  Valid for all real t.
inline double cheb_T(int j, double t) {
    if (j < 0) throw std::invalid_argument("cheb_T: degree must be nonnegative");
    if (j == 0) return 1.0;
    double prev = 1.0, cur = t;
    for (int k = 2; k <= j; ++k) {
        const double next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Chebyshev polynomial of the second kind with the convention U_{-1} = 0.
inline double cheb_U(int j, double t) {
    if (j < -1) throw std::invalid_argument("cheb_U: degree must be at least -1");
    if (j == -1) return 0.0;
    if (j == 0) return 1.0;
    double prev = 1.0, cur = 2.0 * t;
    for (int k = 2; k <= j; ++k) {
        const double next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace detail {

#if defined(__SIZEOF_FLOAT128__)
using quad = __float128;
#else
using quad = long double;
#endif

// sqrt in extended precision: double seed plus two Newton steps.
inline quad qsqrt(quad a) {
    if (a <= 0) return 0;
    quad s = std::sqrt(static_cast<double>(a));
    s = quad(0.5) * (s + a / s);
    s = quad(0.5) * (s + a / s);
    return s;
}

// Q_0 .. Q_jmax at x, extended precision throughout.  The recurrence is
// exact in exact arithmetic; the wide intermediate keeps the subdominant
// solution resolvable at spectral atoms, where the dominant mode of the
// recurrence is absent and rounding noise would otherwise be amplified by
// the ratio of the two characteristic roots.
inline void eigenpoly_sweep(const ChainParams& cp, int jmax, double x,
                            std::vector<quad>& out) {
    out.resize(static_cast<std::size_t>(jmax) + 1);
    out[0] = 1;
    if (jmax == 0) return;
    const quad qx = x, qr0 = cp.r0, qp0 = cp.p0, qp = cp.p;
    const quad qq = 1 - qp;  // exact complement; the double q may round it
    out[1] = (qx - qr0) / qp0;
    for (int j = 1; j < jmax; ++j)
        out[static_cast<std::size_t>(j) + 1] =
            (qx * out[static_cast<std::size_t>(j)] - qq * out[static_cast<std::size_t>(j) - 1]) / qp;
}

inline void eigenpoly_values(const ChainParams& cp, int jmax, double x,
                             std::vector<double>& out) {
    std::vector<quad> buf;
    eigenpoly_sweep(cp, jmax, x, buf);
    out.resize(buf.size());
    for (std::size_t k = 0; k < buf.size(); ++k) out[k] = static_cast<double>(buf[k]);
}

}  // namespace detail

/// Eigenpolynomial values Q_0(x) .. Q_jmax(x).
struct PolyEval {
    double x;
    double xstar;  // x / (2 sqrt(pq))
    std::vector<double> values;
};

/// Q_j by the transition-matrix recurrence: Q_0 = 1, Q_1 = (x - r0)/p0,
/// Q_{j+1} = (x Q_j - q Q_{j-1})/p.  Reference evaluator for all consumers.
inline PolyEval q_poly_recurrence(const ChainParams& cp, int jmax, double x) {
    if (jmax < 0) throw std::invalid_argument("jmax must be nonnegative");
    PolyEval pe;
    pe.x = x;
    pe.xstar = x / cut_halfwidth(cp);
    detail::eigenpoly_values(cp, jmax, x, pe.values);
    return pe;
}

/// Q_j by the closed form
///   (q/p)^(j/2) [ 2(p0-p)/p0 T_j(x*) + (2p-p0)/p0 U_j(x*)
///                 - (r0/p0) sqrt(p/q) U_{j-1}(x*) ],   x* = x/(2 sqrt(pq)).
/// Exists to cross-validate the recurrence; not used downstream.
inline double q_poly_closed(const ChainParams& cp, int j, double x) {
    if (j < 0) throw std::invalid_argument("degree must be nonnegative");
    using detail::quad;
    const quad qp = cp.p, qp0 = cp.p0, qr0 = cp.r0;
    const quad qq = 1 - qp;
    const quad xs = quad(x) / (2 * detail::qsqrt(qp * qq));

    // T_j, U_j, U_{j-1} at x*.
    quad t = 1;
    if (j >= 1) {
        quad prev = 1, cur = xs;
        for (int k = 2; k <= j; ++k) {
            const quad next = 2 * xs * cur - prev;
            prev = cur;
            cur = next;
        }
        t = cur;
    }
    quad uprev = 0, u = 1;  // U_{-1}, U_0
    for (int k = 1; k <= j; ++k) {
        const quad next = 2 * xs * u - uprev;
        uprev = u;
        u = next;
    }

    const quad bracket = (2 * (qp0 - qp) / qp0) * t + ((2 * qp - qp0) / qp0) * u -
                         (qr0 / qp0) * detail::qsqrt(qp / qq) * uprev;

    // (q/p)^(j/2): integer power times a refined square root for odd j.
    quad scale = 1;
    const quad ratio = qq / qp;
    for (int k = 0; k < j / 2; ++k) scale *= ratio;
    if (j % 2 != 0) scale *= detail::qsqrt(ratio);

    return static_cast<double>(scale * bracket);
}

}  // namespace bdspectral
