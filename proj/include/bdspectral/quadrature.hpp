#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bdspectral/chain.hpp"
#include "bdspectral/chebyshev.hpp"
#include "bdspectral/measure.hpp"

namespace bdspectral {

/// Gauss-Chebyshev rule of the second kind scaled to the cut:
///   integral of g(x) sqrt(4pq - x^2) dx over [-2 sqrt(pq), 2 sqrt(pq)]
///   ~ sum_k weights[k] g(nodes[k]),
/// nodes x_k = 2 sqrt(pq) cos(k pi/(N+1)), weights 4pq (pi/(N+1)) sin^2(k pi/(N+1)).
/// Exact for polynomial g of degree <= 2N - 1.
struct QuadratureRule {
    int size;
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline QuadratureRule build_rule(const ChainParams& cp, int N) {
    if (N < 1) throw std::invalid_argument("quadrature rule needs at least one node");
    QuadratureRule rule{N, std::vector<double>(N), std::vector<double>(N)};
    const double c = cut_halfwidth(cp);
    const double step = std::numbers::pi / (N + 1);
    const double wpref = 4.0 * cp.p * cp.q * step;
    // mirrored construction: nodes come in exact +/- pairs with equal weights
    for (int k = 1; 2 * k <= N + 1; ++k) {
        const double theta = k * step;
        const double sn = std::sin(theta);
        const double x = (2 * k == N + 1) ? 0.0 : c * std::cos(theta);
        const double w = wpref * sn * sn;
        rule.nodes[k - 1] = x;
        rule.weights[k - 1] = w;
        rule.nodes[N - k] = -x;
        rule.weights[N - k] = w;
    }
    return rule;
}

/// Integral of f against the full spectral measure: the continuous part by
/// the rule above with the nearest denominator pole subtracted and restored
/// through the closed-form base integral, plus the atoms added exactly.
template <class F>
double integrate_measure(const SpectralMeasure& m, F&& f, int N) {
    const ChainParams& cp = m.params;
    const QuadratureRule rule = build_rule(cp, N);
    double base = continuous_mass(cp);
    double f0 = 0.0;
    if (std::isfinite(base)) {
        f0 = f(detail::nearest_pole_projection(cp));
    } else {
        base = 0.0;  // degenerate corner: plain node sum
    }
    const double pref = cp.p0 / (2.0 * std::numbers::pi);
    double acc = 0.0;
    for (int k = 0; k < rule.size; ++k) {
        const double x = rule.nodes[k];
        acc += rule.weights[k] * (f(x) - f0) / detail::dc_at(cp, x);
    }
    double total = pref * acc + f0 * base;
    for (const MassPoint& mp : m.masses) total += mp.w * f(mp.x);
    return total;
}

/// Spectral n-step transition probability with optional exact cross-check.
struct TransitionResult {
    double spectral;
    std::optional<double> oracle;
    double abs_diff;
};

namespace detail {

inline double pow_int(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

}  // namespace detail

/// Karlin-McGregor representation (P^n)_{ij} = pi_j integral of
/// x^n Q_i(x) Q_j(x) against the spectral measure.
inline TransitionResult km_transition(const ChainParams& cp, int i, int j, int n,
                                      int N, bool with_oracle = false) {
    if (i < 0 || j < 0 || n < 0)
        throw std::invalid_argument("states and step count must be nonnegative");
    const SpectralMeasure m = spectral_measure(cp);
    const int jmax = std::max(i, j);
    std::vector<double> qbuf;
    auto integrand = [&](double x) {
        detail::eigenpoly_values(cp, jmax, x, qbuf);
        return detail::pow_int(x, n) * qbuf[static_cast<std::size_t>(i)] *
               qbuf[static_cast<std::size_t>(j)];
    };
    TransitionResult out{pi_weight(cp, j) * integrate_measure(m, integrand, N),
                         std::nullopt, 0.0};
    if (with_oracle) {
        out.oracle = oracle_transition(cp, i, j, n);
        out.abs_diff = std::abs(out.spectral - *out.oracle);
    }
    return out;
}

/// Orthonormality check: G[i][j] = pi_j integral of Q_i Q_j d psi, which must
/// reproduce the identity matrix.  One polynomial sweep per node.
inline std::vector<std::vector<double>> gram_matrix(const ChainParams& cp, int jmax,
                                                    int N) {
    if (jmax < 0) throw std::invalid_argument("jmax must be nonnegative");
    const SpectralMeasure m = spectral_measure(cp);
    const QuadratureRule rule = build_rule(cp, N);
    const std::size_t dim = static_cast<std::size_t>(jmax) + 1;
    std::vector<std::vector<double>> acc(dim, std::vector<double>(dim, 0.0));

    double base = continuous_mass(cp);
    std::vector<double> qhat(dim, 0.0);
    bool subtract = std::isfinite(base);
    if (subtract) {
        detail::eigenpoly_values(cp, jmax, detail::nearest_pole_projection(cp), qhat);
    } else {
        base = 0.0;
    }

    const double pref = cp.p0 / (2.0 * std::numbers::pi);
    std::vector<double> q;
    for (int k = 0; k < rule.size; ++k) {
        const double x = rule.nodes[k];
        detail::eigenpoly_values(cp, jmax, x, q);
        const double coef = pref * rule.weights[k] / detail::dc_at(cp, x);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j)
                acc[i][j] += coef * (q[i] * q[j] - (subtract ? qhat[i] * qhat[j] : 0.0));
    }
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j) acc[i][j] += qhat[i] * qhat[j] * base;
    for (const MassPoint& mp : m.masses) {
        detail::eigenpoly_values(cp, jmax, mp.x, q);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i; j < dim; ++j) acc[i][j] += mp.w * q[i] * q[j];
    }
    std::vector<std::vector<double>> g(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            g[i][j] = pi_weight(cp, static_cast<int>(j)) * acc[std::min(i, j)][std::max(i, j)];
    return g;
}

}  // namespace bdspectral
