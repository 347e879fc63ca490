#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdspectral {

/// Parameters of a birth-and-death chain with constant transition
/// probabilities away from state 0:
///
///   row 0:     r0  p0   0 ...
///   row i>=1:  ...  q   0   p ...
///
/// q0 = 1 - r0 - p0 is the per-step absorption probability out of state 0.
struct ChainParams {
    double p;
    double q;
    double p0;
    double r0;
    double q0;
};

inline ChainParams new_chain(double p, double p0, double r0) {
    if (!(std::isfinite(p) && std::isfinite(p0) && std::isfinite(r0)))
        throw std::invalid_argument("chain parameters must be finite");
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("p must lie in the open interval (0, 1)");
    if (!(p0 > 0.0))
        throw std::invalid_argument("p0 must be strictly positive");
    if (r0 < 0.0)
        throw std::invalid_argument("r0 must be nonnegative");
    if (r0 + p0 > 1.0)
        throw std::invalid_argument("r0 + p0 must not exceed 1");
    double q0 = 1.0 - r0 - p0;
    if (q0 < 0.0) q0 = 0.0;  // rounding guard; r0 + p0 <= 1 already checked
    return ChainParams{p, 1.0 - p, p0, r0, q0};
}

/// Half-width of the continuous spectral band: the measure's absolutely
/// continuous part lives on [-2*sqrt(pq), 2*sqrt(pq)].
inline double cut_halfwidth(const ChainParams& cp) {
    return 2.0 * std::sqrt(cp.p * cp.q);
}

/// Potential coefficient pi_j: pi_0 = 1, pi_j = p0 p^(j-1) / q^j for j >= 1.
/// Computed by running products so that detailed balance
/// pi_i P[i][i+1] = pi_{i+1} P[i+1][i] holds to rounding accuracy.
inline double pi_weight(const ChainParams& cp, int j) {
    if (j < 0) throw std::invalid_argument("state index must be nonnegative");
    if (j == 0) return 1.0;
    double v = cp.p0 / cp.q;
    for (int k = 2; k <= j; ++k) v *= cp.p / cp.q;
    return v;
}

/// Lazily extended cache of the potential coefficients.
class PiWeights {
  public:
    explicit PiWeights(const ChainParams& cp) : params_(cp), values_{1.0} {}

    double at(int j) {
        if (j < 0) throw std::invalid_argument("state index must be nonnegative");
        while (static_cast<int>(values_.size()) <= j) {
            const int k = static_cast<int>(values_.size());
            values_.push_back(k == 1 ? params_.p0 / params_.q
                                     : values_.back() * (params_.p / params_.q));
        }
        return values_[static_cast<std::size_t>(j)];
    }

    const ChainParams& params() const { return params_; }
    const std::vector<double>& values() const { return values_; }

  private:
    ChainParams params_;
    std::vector<double> values_;
};

/// Sum of all potential coefficients, 1 + sum_{j>=1} p0 p^(j-1)/q^j.
/// Finite exactly when p < q; the positive recurrent atom at x = 1 has
/// weight 1 over this sum.
inline double pi_series_sum(const ChainParams& cp) {
    if (!(cp.p < cp.q))
        throw std::domain_error("pi series diverges unless p < 1/2");
    return 1.0 + cp.p0 / (cp.q - cp.p);
}

/// Finite M x M section of the transition matrix, row-substochastic.
struct TruncatedChain {
    int size;
    std::vector<double> matrix;  // row-major, size*size

    double at(int i, int j) const {
        return matrix[static_cast<std::size_t>(i) * size + j];
    }
};

inline TruncatedChain truncate(const ChainParams& cp, int M) {
    if (M < 2) throw std::invalid_argument("truncation size must be at least 2");
    TruncatedChain tc{M, std::vector<double>(static_cast<std::size_t>(M) * M, 0.0)};
    auto set = [&](int i, int j, double v) {
        tc.matrix[static_cast<std::size_t>(i) * M + j] = v;
    };
    set(0, 0, cp.r0);
    set(0, 1, cp.p0);
    for (int i = 1; i < M; ++i) {
        set(i, i - 1, cp.q);
        if (i + 1 < M) set(i, i + 1, cp.p);
    }
    return tc;
}

namespace detail {

// One step of v <- v * P on a window of size M.  The window edge loses the
// outgoing p-mass, matching the truncated matrix exactly.
inline void evolve_step(const ChainParams& cp, std::vector<double>& v) {
    const int M = static_cast<int>(v.size());
    std::vector<double> w(v.size(), 0.0);
    for (int c = 0; c < M; ++c) {
        double acc = 0.0;
        if (c == 0) {
            acc += v[0] * cp.r0;
            if (M > 1) acc += v[1] * cp.q;
        } else {
            acc += v[c - 1] * (c - 1 == 0 ? cp.p0 : cp.p);
            if (c + 1 < M) acc += v[c + 1] * cp.q;
        }
        w[c] = acc;
    }
    v.swap(w);
}

}  // namespace detail

/// Exact n-step transition probability (P^n)_{ij} of the infinite chain,
/// obtained by powering a finite section large enough that the walk cannot
/// feel the truncation: M = max(i, j) + n + 2.
inline double oracle_transition(const ChainParams& cp, int i, int j, int n) {
    if (i < 0 || j < 0 || n < 0)
        throw std::invalid_argument("states and step count must be nonnegative");
    const int M = std::max(i, j) + n + 2;
    std::vector<double> v(static_cast<std::size_t>(M), 0.0);
    v[static_cast<std::size_t>(i)] = 1.0;
    for (int s = 0; s < n; ++s) detail::evolve_step(cp, v);
    return v[static_cast<std::size_t>(j)];
}

/// p_{-1}(n): probability of having been absorbed by time n, starting from
/// the given finitely supported initial distribution.
inline double absorption_probability(const ChainParams& cp,
                                     const std::vector<double>& initial, int n) {
    if (n < 0) throw std::invalid_argument("step count must be nonnegative");
    if (initial.empty())
        throw std::invalid_argument("initial distribution must be nonempty");
    double total = 0.0;
    for (double x : initial) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument("initial distribution entries must be nonnegative");
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("initial distribution must sum to 1");
    const int M = static_cast<int>(initial.size()) + n + 2;
    std::vector<double> v(static_cast<std::size_t>(M), 0.0);
    for (std::size_t k = 0; k < initial.size(); ++k) v[k] = initial[k];
    for (int s = 0; s < n; ++s) detail::evolve_step(cp, v);
    double alive = 0.0;
    for (double x : v) alive += x;
    return 1.0 - alive;
}

}  // namespace bdspectral
