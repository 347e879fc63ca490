#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdspectral/chain.hpp"
#include "bdspectral/chebyshev.hpp"
#include "bdspectral/measure.hpp"

namespace bdspectral {

/// Outcome of the quasi-stationary existence question.  When a family
/// exists it is parametrized by x in the open interval (eta, 1).
struct QsdFamily {
    bool exists;
    double eta;
};

/// Quasi-stationary distributions exist (as a one-parameter family) when
/// q0 > 0, absorption is certain (p <= 1/2) and eta < 1; under those
/// constraints eta = 1 happens only at p = 1/2.
inline QsdFamily qsd_exists(const ChainParams& cp) {
    if (!(cp.q0 > 0.0))
        throw std::domain_error(
            "qsd_exists: theory precondition unmet, no absorption (q0 = 0)");
    if (cp.p > 0.5)
        throw std::domain_error(
            "qsd_exists: theory precondition unmet, absorption not certain (p > 1/2)");
    const double eta = support_sup_eta(spectral_measure(cp));
    return QsdFamily{eta < 1.0, eta};
}

/// A quasi-stationary distribution alpha_j(x) = pi_j (1 - x) Q_j(x) / q0,
/// truncated once the geometric tail bound drops below the requested
/// tolerance.
struct QsdDistribution {
    double x;
    std::vector<double> alpha;
    int jcut;
    double tail_bound;
};

inline QsdDistribution qsd_alpha(const ChainParams& cp, double x, double tol) {
    const QsdFamily fam = qsd_exists(cp);
    if (!fam.exists)
        throw std::domain_error("qsd_alpha: no quasi-stationary family (eta = 1)");
    if (!(x > fam.eta && x < 1.0))
        throw std::domain_error("qsd_alpha: x must lie in the open interval (eta, 1)");
    if (!(tol > 0.0)) throw std::invalid_argument("qsd_alpha: tol must be positive");

    // dominant growth ratio of pi_j Q_j(x): rho = sqrt(p/q) (x* + sqrt(x*^2-1))
    const double xs = x / cut_halfwidth(cp);
    const double rho = std::sqrt(cp.p / cp.q) * (xs + std::sqrt(xs * xs - 1.0));
    if (!(rho < 1.0))
        throw std::domain_error("qsd_alpha: tail ratio not contracting");

    using detail::quad;
    const quad qx = x, qr0 = cp.r0, qp0 = cp.p0, qp = cp.p;
    const quad qq = 1 - qp;
    const double scale = (1.0 - x) / cp.q0;

    QsdDistribution out{x, {}, 0, 0.0};
    constexpr int kMaxTerms = 2'000'000;
    quad Qjm1 = 0, Qj = 1;  // Q_{-1}, Q_0
    double pi_j = 1.0;
    for (int j = 0; j < kMaxTerms; ++j) {
        if (j == 1) {
            Qjm1 = Qj;
            Qj = (qx - qr0) / qp0;
        } else if (j >= 2) {
            const quad qnext = (qx * Qj - qq * Qjm1) / qp;
            Qjm1 = Qj;
            Qj = qnext;
        }
        if (j >= 1) pi_j = (j == 1) ? cp.p0 / cp.q : pi_j * cp.p / cp.q;
        const double aj = pi_j * scale * static_cast<double>(Qj);
        if (aj < -1e-12)
            throw std::runtime_error("qsd_alpha: negative alpha component detected");
        out.alpha.push_back(aj);
        out.jcut = j;
        if (j >= 8 && aj / (1.0 - rho) < tol) {
            out.tail_bound = aj * rho / (1.0 - rho);
            return out;
        }
    }
    throw std::runtime_error("qsd_alpha: tail did not converge within the term cap");
}

enum class RatioMode { full, even_subsequence, odd_subsequence };

inline std::string to_string(RatioMode m) {
    switch (m) {
        case RatioMode::full: return "full";
        case RatioMode::even_subsequence: return "even-subsequence";
        default: return "odd-subsequence";
    }
}

/// Limit of (P^n)_{ij} / (P^n)_{kl} as n grows.
struct RatioLimitResult {
    double limit;
    RatioMode mode;
    double eta_used;
    bool no_mass_caveat;
};

namespace detail {

inline double eq15_value(const ChainParams& cp, int i, int j, int k, int l,
                         double eta) {
    const int jmax = std::max(std::max(i, j), std::max(k, l));
    std::vector<double> q;
    eigenpoly_values(cp, jmax, eta, q);
    const double num = q[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(j)];
    const double den = q[static_cast<std::size_t>(k)] * q[static_cast<std::size_t>(l)];
    return pi_weight(cp, j) / pi_weight(cp, l) * num / den;
}

}  // namespace detail

/// Full-sequence ratio limit.  Covered cases: recurrent aperiodic chains
/// (r0 + p0 = 1, p <= 1/2, r0 != 0), where the limit is pi_j/pi_l, and
/// chains with r0 != 0 carrying at least one point mass, where the limit is
/// (pi_j/pi_l) Q_i(eta) Q_j(eta) / (Q_k(eta) Q_l(eta)).
inline RatioLimitResult ratio_limit(const ChainParams& cp, int i, int j, int k, int l) {
    if (i < 0 || j < 0 || k < 0 || l < 0)
        throw std::invalid_argument("state indices must be nonnegative");
    const bool recurrent = std::abs(cp.r0 + cp.p0 - 1.0) <= 1e-12 && cp.p <= 0.5;
    if (recurrent && cp.r0 != 0.0) {
        return RatioLimitResult{pi_weight(cp, j) / pi_weight(cp, l), RatioMode::full,
                                1.0, false};
    }
    if (cp.r0 != 0.0) {
        const SpectralMeasure m = spectral_measure(cp);
        if (!m.masses.empty()) {
            const double eta = support_sup_eta(m);
            return RatioLimitResult{detail::eq15_value(cp, i, j, k, l, eta),
                                    RatioMode::full, eta, false};
        }
    }
    throw std::domain_error("ratio_limit: limit not guaranteed by cited theory");
}

enum class Parity { even, odd };

/// Even/odd subsequence ratio limit for the symmetric case r0 = 0, defined
/// when i - j and k - l have the same parity.  Evaluates the same expression
/// at eta; when no atom exists (p = 1/2) the value is still reported with a
/// caveat flag.
inline RatioLimitResult ratio_limit_parity(const ChainParams& cp, int i, int j, int k,
                                           int l, Parity parity) {
    if (i < 0 || j < 0 || k < 0 || l < 0)
        throw std::invalid_argument("state indices must be nonnegative");
    if (cp.r0 != 0.0)
        throw std::domain_error("ratio_limit_parity: parity theorem requires r0 = 0");
    if (((i - j) - (k - l)) % 2 != 0)
        throw std::invalid_argument(
            "ratio_limit_parity: i - j and k - l must have the same parity");
    const SpectralMeasure m = spectral_measure(cp);
    const double eta = support_sup_eta(m);
    return RatioLimitResult{
        detail::eq15_value(cp, i, j, k, l, eta),
        parity == Parity::even ? RatioMode::even_subsequence : RatioMode::odd_subsequence,
        eta, m.masses.empty()};
}

}  // namespace bdspectral
