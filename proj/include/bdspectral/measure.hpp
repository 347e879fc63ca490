#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bdspectral/chain.hpp"

namespace bdspectral {

namespace detail {

// Branch of sqrt(z^2 - 4pq) that is positive on the real axis right of the
// cut [-2 sqrt(pq), 2 sqrt(pq)] and negative to the left of it.  On the real
// axis this is sign(x) sqrt(x^2 - 4pq); slightly-negative radicands from
// rounding at the cut edges collapse to 0.
inline double branch_sqrt(const ChainParams& cp, double x) {
    const double s2 = x * x - 4.0 * cp.p * cp.q;
    if (s2 <= 0.0) return 0.0;
    return std::copysign(std::sqrt(s2), x);
}

// Same branch continued to the complex plane: z * sqrt(1 - 4pq/z^2) with the
// principal square root, single valued off the closed cut and ~ z at infinity.
inline std::complex<double> branch_sqrt(const ChainParams& cp, std::complex<double> z) {
    const std::complex<double> w = 1.0 - 4.0 * cp.p * cp.q / (z * z);
    return z * std::sqrt(w);
}

inline bool on_closed_cut(const ChainParams& cp, std::complex<double> z) {
    return z.imag() == 0.0 && std::abs(z.real()) <= cut_halfwidth(cp);
}

// Density denominator (p - p0) x^2 - r0 (2p - p0) x + p r0^2 + p0^2 q,
// strictly positive on the open cut.
inline double dc_at(const ChainParams& cp, double x) {
    return ((cp.p - cp.p0) * x - cp.r0 * (2.0 * cp.p - cp.p0)) * x +
           cp.p * cp.r0 * cp.r0 + cp.p0 * cp.p0 * cp.q;
}

}  // namespace detail

/// Stieltjes transform of the chopped chain,
/// n(z) = (-z + sqrt(z^2 - 4pq)) / (2pq), evaluated as -2/(z + sqrt(z^2-4pq))
/// which is the same function without cancellation at large |z|.
inline std::complex<double> stieltjes_n(const ChainParams& cp, std::complex<double> z) {
    if (detail::on_closed_cut(cp, z))
        throw std::domain_error("stieltjes_n: z lies on the spectral cut");
    return -2.0 / (z + detail::branch_sqrt(cp, z));
}

/// Coefficients of m(z) written with a rational denominator:
///   m(z) = [r0 - (1 - p0/2p) z + (p0/2p) sqrt(z^2-4pq)]
///          / [(1 - p0/p) z^2 - 2 r0 (1 - p0/2p) z + r0^2 + p0^2 q / p].
struct StieltjesM {
    ChainParams params;
    double n0, n1, ns;  // numerator: n0 + n1 z + ns sqrt(z^2 - 4pq)
    double a, b, c;     // denominator: a z^2 + b z + c

    explicit StieltjesM(const ChainParams& cp)
        : params(cp),
          n0(cp.r0),
          n1(-(1.0 - cp.p0 / (2.0 * cp.p))),
          ns(cp.p0 / (2.0 * cp.p)),
          a(1.0 - cp.p0 / cp.p),
          b(-2.0 * cp.r0 * (1.0 - cp.p0 / (2.0 * cp.p))),
          c(cp.r0 * cp.r0 + cp.p0 * cp.p0 * cp.q / cp.p) {}

    std::complex<double> denominator(std::complex<double> z) const {
        return (a * z + b) * z + c;
    }

    std::complex<double> numerator(std::complex<double> z) const {
        const std::complex<double> s = detail::branch_sqrt(params, z);
        // For p0 <= 2p the terms n1 z and ns s cancel as |z| grows; rewrite
        // their sum as ns (s - k z) = ns ((1-k^2) z^2 - 4pq) / (s + k z).
        const double k = (2.0 * params.p - params.p0) / params.p0;
        if (k >= 0.0 && std::abs(z) > 2.0 * cut_halfwidth(params)) {
            const double one_minus_k2 =
                4.0 * params.p * (params.p0 - params.p) / (params.p0 * params.p0);
            const std::complex<double> diff =
                (one_minus_k2 * z * z - 4.0 * params.p * params.q) / (s + k * z);
            return n0 + ns * diff;
        }
        return n0 + n1 * z + ns * s;
    }
};

/// Stieltjes transform m(z) of the spectral measure.
inline std::complex<double> stieltjes_m(const ChainParams& cp, std::complex<double> z) {
    if (detail::on_closed_cut(cp, z))
        throw std::domain_error("stieltjes_m: z lies on the spectral cut");
    const StieltjesM f(cp);
    const std::complex<double> den = f.denominator(z);
    const double scale = std::abs(f.a) * std::norm(z) + std::abs(f.b) * std::abs(z) +
                         std::abs(f.c);
    if (std::abs(den) <= 1e-12 * scale)
        throw std::domain_error("stieltjes_m: z is a pole of m");
    return f.numerator(z) / den;
}

/// Real roots of the denominator of m(z), in increasing order.  When
/// |p0 - p| <= 1e-12 the quadratic degenerates and the linear-denominator
/// formula r0 + pq/r0 is used instead (no root at all when r0 = 0).
inline std::vector<double> denominator_roots(const ChainParams& cp) {
    if (std::abs(cp.p0 - cp.p) <= 1e-12) {
        if (cp.r0 > 0.0) return {cp.r0 + cp.p * cp.q / cp.r0};
        return {};
    }
    const double delta = cp.r0 * cp.r0 - 4.0 * cp.q * (cp.p - cp.p0);
    if (delta < 0.0) return {};
    // roots of (p - p0) x^2 - r0 (2p - p0) x + (p r0^2 + p0^2 q)
    const double A2 = cp.p - cp.p0;
    const double B2 = -cp.r0 * (2.0 * cp.p - cp.p0);
    const double C2 = cp.p * cp.r0 * cp.r0 + cp.p0 * cp.p0 * cp.q;
    const double sq = cp.p0 * std::sqrt(delta);  // sqrt of the discriminant
    const double qst = -0.5 * (B2 + std::copysign(sq, B2));
    double x1 = qst / A2;
    double x2 = C2 / qst;
    if (x1 > x2) std::swap(x1, x2);
    if (x1 == x2) return {x1};
    return {x1, x2};
}

/// A spectral atom: pole location and weight, the negative residue of m.
struct MassPoint {
    double x;
    double w;
};

/// Point masses of the spectral measure.  Each denominator root is either a
/// removable singularity of m (the numerator vanishes with it, no mass) or a
/// genuine simple pole, in which case the weight -N(x)/D'(x) is positive.
/// Writing A = (1 - p0/2p) x - r0 and B = p0/2p, the denominator factors
/// pointwise as (A + Bs)(A - Bs) and the numerator equals -(A - Bs); a root
/// is pole-type exactly when the A + Bs factor is the vanishing one.
inline std::vector<MassPoint> point_masses(const ChainParams& cp) {
    std::vector<MassPoint> masses;
    const StieltjesM f(cp);
    for (double x : denominator_roots(cp)) {
        const double s = detail::branch_sqrt(cp, x);
        const double A = (1.0 - cp.p0 / (2.0 * cp.p)) * x - cp.r0;
        const double B = cp.p0 / (2.0 * cp.p);
        const double u = A + B * s;
        const double v = A - B * s;
        if (!(std::abs(u) < std::abs(v))) continue;  // removable, no mass
        const double N = f.n0 + f.n1 * x + f.ns * s;
        const double dprime = 2.0 * f.a * x + f.b;
        const double w = -N / dprime;
        if (w > 0.0) masses.push_back({x, w});
    }
    return masses;
}

/// Weight expression as printed in the two-root analysis,
///   [qp0^2/(p|x-r0|) - |x-r0|]_+ / sqrt(r0^2 - 4q(p-p0));
/// it equals (p0/p) times the residue weight.  Kept for cross-checking.
inline double printed_two_root_weight(const ChainParams& cp, double x) {
    if (std::abs(cp.p0 - cp.p) <= 1e-12)
        throw std::domain_error("printed weight formula requires p0 != p");
    const double delta = cp.r0 * cp.r0 - 4.0 * cp.q * (cp.p - cp.p0);
    if (delta <= 0.0) return 0.0;
    const double d = std::abs(x - cp.r0);
    const double bracket = cp.q * cp.p0 * cp.p0 / (cp.p * d) - d;
    return bracket > 0.0 ? bracket / std::sqrt(delta) : 0.0;
}

/// Continuous spectral density on the cut,
///   (p0 / 2 pi) sqrt(4pq - x^2) / [(p-p0) x^2 - r0 (2p-p0) x + p r0^2 + p0^2 q].
inline double density_at(const ChainParams& cp, double x) {
    const double c = cut_halfwidth(cp);
    if (std::abs(x) > c)
        throw std::domain_error("density_at: x outside the spectral cut");
    if (std::abs(x) == c) return 0.0;
    const double rad = std::max(4.0 * cp.p * cp.q - x * x, 0.0);
    return cp.p0 / (2.0 * std::numbers::pi) * std::sqrt(rad) / detail::dc_at(cp, x);
}

/// The full spectral measure: continuous density descriptor plus atoms plus
/// the supremum eta of the support.
struct SpectralMeasure {
    ChainParams params;
    std::vector<MassPoint> masses;
    double eta;

    double density(double x) const { return density_at(params, x); }
};

inline SpectralMeasure spectral_measure(const ChainParams& cp) {
    SpectralMeasure m{cp, point_masses(cp), cut_halfwidth(cp)};
    for (const MassPoint& mp : m.masses) m.eta = std::max(m.eta, mp.x);
    return m;
}

inline double support_sup_eta(const SpectralMeasure& m) {
    double eta = cut_halfwidth(m.params);
    for (const MassPoint& mp : m.masses) eta = std::max(eta, mp.x);
    return eta;
}

/// Total mass of the continuous part in closed form.  With
/// I(y) = integral of sqrt(4pq - x^2)/(x - y) over the cut
///      = pi (sqrt(y^2 - 4pq) - y)   (branch as above, complex y allowed),
/// partial fractions of 1/Dc give the integral for any root configuration.
/// Returns NaN in the degenerate double-root-at-the-edge corner.
inline double continuous_mass(const ChainParams& cp) {
    using std::numbers::pi;
    const double A2 = cp.p - cp.p0;
    const double B2 = -cp.r0 * (2.0 * cp.p - cp.p0);
    const double C2 = cp.p * cp.r0 * cp.r0 + cp.p0 * cp.p0 * cp.q;
    const double pref = cp.p0 / (2.0 * pi);
    const double c2 = 4.0 * cp.p * cp.q;

    auto I_real = [&](double y) { return pi * (detail::branch_sqrt(cp, y) - y); };
    auto I_cplx = [&](std::complex<double> y) {
        return pi * (detail::branch_sqrt(cp, y) - y);
    };

    if (std::abs(cp.p0 - cp.p) <= 1e-12) {
        if (B2 == 0.0) return pref * (pi * c2 / 2.0) / C2;  // constant denominator
        const double z0 = -C2 / B2;
        return pref * I_real(z0) / B2;
    }
    const double delta = cp.r0 * cp.r0 - 4.0 * cp.q * (cp.p - cp.p0);
    if (delta < 0.0) {
        const double x0 = -B2 / (2.0 * A2);
        const double h = cp.p0 * std::sqrt(-delta) / (2.0 * std::abs(A2));
        const std::complex<double> z(x0, h);
        return pref * I_cplx(z).imag() / (A2 * h);
    }
    const std::vector<double> roots = denominator_roots(cp);
    if (roots.size() == 2) {
        return pref * (I_real(roots[0]) - I_real(roots[1])) /
               (A2 * (roots[0] - roots[1]));
    }
    // double root: d/dy I(y) = pi (y / sqrt(y^2-4pq) - 1)
    const double z = roots[0];
    const double s = detail::branch_sqrt(cp, z);
    if (s == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return pref * pi * (z / s - 1.0) / A2;
}

namespace detail {

// Real point of the cut closest to the denominator roots; the pole
// subtraction in the quadrature anchors there.
inline double nearest_pole_projection(const ChainParams& cp) {
    const double c = cut_halfwidth(cp);
    if (std::abs(cp.p0 - cp.p) > 1e-12) {
        const double delta = cp.r0 * cp.r0 - 4.0 * cp.q * (cp.p - cp.p0);
        if (delta < 0.0) {
            const double x0 = -(-cp.r0 * (2.0 * cp.p - cp.p0)) / (2.0 * (cp.p - cp.p0));
            return std::clamp(x0, -c, c);
        }
    }
    const std::vector<double> roots = denominator_roots(cp);
    if (roots.empty()) return 0.0;
    double best = roots[0];
    double bestd = std::max(0.0, std::abs(roots[0]) - c);
    for (std::size_t k = 1; k < roots.size(); ++k) {
        const double d = std::max(0.0, std::abs(roots[k]) - c);
        if (d < bestd) {
            best = roots[k];
            bestd = d;
        }
    }
    return std::clamp(best, -c, c);
}

}  // namespace detail

/// Classification of the parameter triple by number of atoms.
struct RegionClass {
    int count;                 // 0, 1 or 2 point masses
    bool boundary;             // within 1e-9 of a classification boundary
    bool recurrent;            // r0 + p0 = 1 and p <= 1/2
    bool positive_recurrent;   // recurrent and p < 1/2
};

inline RegionClass classify_region(const ChainParams& cp) {
    const double sq_pq = std::sqrt(cp.p * cp.q);
    const double slope = std::sqrt(cp.p / cp.q);
    const double lower = 2.0 * cp.p - slope * cp.r0;
    const double upper = 2.0 * cp.p + slope * cp.r0;

    int count = 0;
    if (std::abs(cp.p0 - cp.p) <= 1e-12) {
        if (cp.p < 0.5 && cp.r0 > sq_pq && cp.r0 <= 1.0 - cp.p) count = 1;
    } else if (cp.p < 0.5) {
        if (cp.p0 > upper) count = 2;
        else if (cp.p0 > lower) count = 1;
    } else if (cp.p > 0.5) {
        if (cp.p0 > lower && cp.r0 > sq_pq) count = 1;
    }

    const bool recurrent = std::abs(cp.r0 + cp.p0 - 1.0) <= 1e-12 && cp.p <= 0.5;
    const bool boundary = std::abs(cp.p0 - lower) <= 1e-9 ||
                          std::abs(cp.p0 - upper) <= 1e-9 ||
                          std::abs(cp.r0 - sq_pq) <= 1e-9 ||
                          std::abs(cp.p - 0.5) <= 1e-9;
    return RegionClass{count, boundary, recurrent, recurrent && cp.p < 0.5};
}

}  // namespace bdspectral
