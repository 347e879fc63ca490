#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdspectral/bdspectral.hpp"
#include "bdspectral/jsonio.hpp"

namespace bdspectral::cli {

struct CheckResult {
    std::string name;
    bool pass;
    double max_err;
};

namespace detail_cli {

inline void emit_masses(JsonWriter& jw, const std::vector<MassPoint>& masses) {
    jw.begin_array();
    for (const MassPoint& mp : masses) {
        jw.begin_object();
        jw.key("x").value(mp.x);
        jw.key("w").value(mp.w);
        jw.end_object();
    }
    jw.end_array();
}

// Output sink: stdout by default, file when --output was given (exit 3 when
// the path cannot be opened).
class Sink {
  public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw UnwritableOutput{path};
            os_ = file_.get();
        }
    }
    std::ostream& stream() { return *os_; }

    struct UnwritableOutput {
        std::string path;
    };

  private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

}  // namespace detail_cli

inline void write_classify(std::ostream& os, const ChainParams& cp) {
    const SpectralMeasure m = spectral_measure(cp);
    const RegionClass rc = classify_region(cp);
    JsonWriter jw(os);
    jw.begin_object();
    jw.key("p").value(cp.p);
    jw.key("q").value(cp.q);
    jw.key("p0").value(cp.p0);
    jw.key("r0").value(cp.r0);
    jw.key("q0").value(cp.q0);
    jw.key("mass_count").value(static_cast<int>(m.masses.size()));
    jw.key("masses");
    detail_cli::emit_masses(jw, m.masses);
    jw.key("eta").value(m.eta);
    jw.key("recurrent").value(rc.recurrent);
    jw.key("positive_recurrent").value(rc.positive_recurrent);
    jw.key("boundary").value(rc.boundary);
    jw.end_object();
    os << "\n";
}

/// Atlas rows over the lattice {r0 = i/(G-1), p0 = j/(G-1)} restricted to the
/// feasible triangle (p0 > 0, r0 + p0 <= 1), row-major in r0 then p0.  Cells
/// on the diagonal use p0 = 1 - r0 exactly so the constraint holds verbatim.
inline void write_atlas(std::ostream& os, double p, int grid) {
    os << "r0,p0,mass_count,boundary\n";
    for (int i = 0; i < grid; ++i) {
        const double r0 = static_cast<double>(i) / (grid - 1);
        for (int j = 1; j < grid; ++j) {
            if (i + j > grid - 1) continue;
            const double p0 =
                (i + j == grid - 1) ? 1.0 - r0 : static_cast<double>(j) / (grid - 1);
            const ChainParams cp = new_chain(p, p0, r0);
            const RegionClass rc = classify_region(cp);
            os << fmt_double(r0) << "," << fmt_double(p0) << "," << rc.count << ","
               << (rc.boundary ? 1 : 0) << "\n";
        }
    }
}

inline void write_measure_json(std::ostream& os, const ChainParams& cp, int nodes) {
    const SpectralMeasure m = spectral_measure(cp);
    const QuadratureRule rule = build_rule(cp, nodes);
    JsonWriter jw(os);
    jw.begin_object();
    jw.key("p").value(cp.p);
    jw.key("q").value(cp.q);
    jw.key("p0").value(cp.p0);
    jw.key("r0").value(cp.r0);
    jw.key("q0").value(cp.q0);
    jw.key("eta").value(m.eta);
    jw.key("masses");
    detail_cli::emit_masses(jw, m.masses);
    jw.key("nodes").begin_array();
    for (double x : rule.nodes) jw.value(x);
    jw.end_array();
    jw.key("density").begin_array();
    for (double x : rule.nodes) jw.value(density_at(cp, x));
    jw.end_array();
    jw.end_object();
    os << "\n";
}

inline void write_measure_csv(std::ostream& os, const ChainParams& cp, int nodes) {
    const QuadratureRule rule = build_rule(cp, nodes);
    os << "x,density\n";
    for (double x : rule.nodes)
        os << fmt_double(x) << "," << fmt_double(density_at(cp, x)) << "\n";
}

inline void write_qsd(std::ostream& os, const QsdDistribution& d) {
    JsonWriter jw(os);
    jw.begin_object();
    jw.key("x").value(d.x);
    jw.key("alpha").begin_array();
    for (double a : d.alpha) jw.value(a);
    jw.end_array();
    jw.key("jcut").value(d.jcut);
    jw.key("tail_bound").value(d.tail_bound);
    jw.end_object();
    os << "\n";
}

/// Parameter-specific invariant suite behind the `verify` subcommand.
inline std::vector<CheckResult> verify_checks(const ChainParams& cp, int nodes) {
    std::vector<CheckResult> checks;
    auto add = [&](const std::string& name, double err, double tol) {
        checks.push_back({name, err <= tol, err});
    };

    const SpectralMeasure m = spectral_measure(cp);
    const RegionClass rc = classify_region(cp);

    {
        PiWeights pw(cp);
        double err = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double lhs = pw.at(i) * (i == 0 ? cp.p0 : cp.p);
            const double rhs = pw.at(i + 1) * cp.q;
            err = std::max(err, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
        }
        add("detailed_balance", err, 1e-13);
    }
    {
        std::mt19937 gen(911);
        double err = 0.0;
        for (int t = 0; t < 20; ++t) {
            const int i = static_cast<int>(gen() % 6);
            const int j = static_cast<int>(gen() % 6);
            const int n = static_cast<int>(gen() % 12);
            const int M = std::max(i, j) + n + 2;
            std::vector<double> a(static_cast<std::size_t>(M), 0.0);
            std::vector<double> b(static_cast<std::size_t>(M) + 10, 0.0);
            a[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] = 1.0;
            for (int s = 0; s < n; ++s) {
                detail::evolve_step(cp, a);
                detail::evolve_step(cp, b);
            }
            err = std::max(err, std::abs(a[static_cast<std::size_t>(j)] -
                                         b[static_cast<std::size_t>(j)]));
        }
        add("truncation_consistency", err, 0.0);
    }
    {
        const double total = integrate_measure(m, [](double) { return 1.0; }, nodes);
        add("total_mass", std::abs(total - 1.0), 1e-10);
    }
    {
        const double m1 = integrate_measure(m, [](double x) { return x; }, nodes);
        add("first_moment_equals_r0", std::abs(m1 - cp.r0), 1e-10);
    }
    {
        double err = 0.0;
        for (int n = 0; n <= 30; ++n) {
            const double spectral = km_transition(cp, 0, 0, n, nodes).spectral;
            err = std::max(err, std::abs(spectral - oracle_transition(cp, 0, 0, n)));
        }
        add("moment_identity", err, 1e-8);
    }
    {
        std::mt19937 gen(4242);
        double err = 0.0;
        for (int t = 0; t < 20; ++t) {
            const int i = static_cast<int>(gen() % 7);
            const int j = static_cast<int>(gen() % 7);
            const int n = static_cast<int>(gen() % 13);
            err = std::max(err, km_transition(cp, i, j, n, nodes, true).abs_diff);
        }
        add("km_vs_oracle", err, 1e-8);
    }
    {
        const auto g = gram_matrix(cp, 10, nodes);
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = 0; j < g.size(); ++j)
                err = std::max(err, std::abs(g[i][j] - (i == j ? 1.0 : 0.0)));
        add("gram_identity", err, 1e-8);
    }
    add("classification_consistency",
        std::abs(rc.count - static_cast<int>(m.masses.size())), 0.0);
    {
        double err = 0.0;
        const double c = cut_halfwidth(cp);
        for (const MassPoint& mp : m.masses)
            err = std::max(err, std::max(0.0, c - 1e-12 - std::abs(mp.x)));
        add("masses_outside_cut", err, 0.0);
    }
    {
        const double c = cut_halfwidth(cp);
        double worst = 0.0;
        for (int k = 0; k <= 400; ++k) {
            const double x = -c + 2.0 * c * k / 400.0;
            worst = std::min(worst, density_at(cp, std::clamp(x, -c, c)));
        }
        add("density_nonnegative", std::max(0.0, -worst), 0.0);
    }
    {
        const double c = cut_halfwidth(cp);
        double mind = std::numeric_limits<double>::infinity();
        for (int k = 1; k < 400; ++k) {
            const double x = -c + 2.0 * c * k / 400.0;
            mind = std::min(mind, detail::dc_at(cp, x));
        }
        add("denominator_positive_on_cut", mind > 0.0 ? 0.0 : 1.0, 0.0);
    }
    {
        double err = 0.0;
        for (int i = 0; i <= 4; ++i)
            for (int j = 0; j <= 4; ++j)
                for (int n : {1, 5, 12}) {
                    const double lhs = pi_weight(cp, i) * oracle_transition(cp, i, j, n);
                    const double rhs = pi_weight(cp, j) * oracle_transition(cp, j, i, n);
                    err = std::max(err, std::abs(lhs - rhs));
                }
        add("reversibility_symmetry", err, 1e-10);
    }
    {
        double err = 0.0;
        for (int n = 0; n <= 20; n += 4) {
            const double a = km_transition(cp, 1, 2, n, 1024).spectral;
            const double b = km_transition(cp, 1, 2, n, 2048).spectral;
            err = std::max(err, std::abs(a - b));
        }
        add("quadrature_convergence", err, 1e-10);
    }
    {
        double worst = 0.0;
        for (int i : {0, 3}) {
            for (int n : {3, 8}) {
                double sum = 0.0;
                for (int j = 0; j <= i + n; ++j)
                    sum += km_transition(cp, i, j, n, nodes).spectral;
                worst = std::max(worst, sum - 1.0);
            }
        }
        add("row_sum_substochastic", std::max(0.0, worst), 1e-9);
    }
    if (std::abs(cp.p0 - cp.p) > 1e-12) {
        double err = 0.0;
        for (const MassPoint& mp : m.masses) {
            const double printed = printed_two_root_weight(cp, mp.x);
            err = std::max(err, std::abs(mp.w * cp.p0 / cp.p - printed));
        }
        add("printed_weight_proportionality", err, 1e-10);
    } else {
        const double expected =
            cp.r0 > 0.0 ? std::max(1.0 - cp.p * cp.q / (cp.r0 * cp.r0), 0.0) : 0.0;
        const double got = m.masses.empty() ? 0.0 : m.masses.front().w;
        add("single_root_weight_matches_positive_part", std::abs(got - expected), 1e-12);
    }
    if (rc.positive_recurrent) {
        const double got = m.masses.empty() ? 0.0 : m.masses.back().w;
        add("mass_at_one_equals_inverse_pi_sum",
            std::abs(got - 1.0 / pi_series_sum(cp)), 1e-10);
    }
    if (cp.q0 > 0.0 && cp.p < 0.5 && m.eta < 1.0) {
        const double x = 0.5 * (m.eta + 1.0);
        const QsdDistribution d = qsd_alpha(cp, x, 1e-10);
        double sum = 0.0;
        for (double a : d.alpha) sum += a;
        add("qsd_normalization", std::abs(sum - 1.0), 1e-8);
        double resid = 0.0;
        for (int j = 0; j + 2 <= d.jcut; ++j) {
            double lhs;
            if (j == 0)
                lhs = d.alpha[0] * cp.r0 + d.alpha[1] * cp.q;
            else
                lhs = d.alpha[static_cast<std::size_t>(j) - 1] * (j == 1 ? cp.p0 : cp.p) +
                      d.alpha[static_cast<std::size_t>(j) + 1] * cp.q;
            resid = std::max(resid, std::abs(lhs - x * d.alpha[static_cast<std::size_t>(j)]));
        }
        add("qsd_left_eigenvector", resid, 1e-10);
    }
    return checks;
}

inline bool write_verify(std::ostream& os, const ChainParams& cp, int nodes) {
    const std::vector<CheckResult> checks = verify_checks(cp, nodes);
    bool all = true;
    JsonWriter jw(os);
    jw.begin_object();
    jw.key("checks").begin_array();
    for (const CheckResult& c : checks) {
        all = all && c.pass;
        jw.begin_object();
        jw.key("name").value(c.name);
        jw.key("pass").value(c.pass);
        jw.key("max_err").value(c.max_err);
        jw.end_object();
    }
    jw.end_array();
    jw.key("all_pass").value(all);
    jw.end_object();
    os << "\n";
    return all;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"spectral measures and transition asymptotics of constant-rate "
                 "birth-and-death chains"};
    app.require_subcommand(1);

    double p = 0, p0 = 0, r0 = 0, x = 0, tol = 1e-10;
    int si = 0, sj = 0, sk = 0, sl = 0, n = 0, nodes = 512, grid = 200;
    std::string output, format = "json", method = "both", parity;

    auto add_params = [&](CLI::App* cmd) {
        cmd->add_option("--p", p, "up-step probability for states >= 1")->required();
        cmd->add_option("--p0", p0, "up-step probability from state 0")->required();
        cmd->add_option("--r0", r0, "holding probability at state 0")->required();
    };

    CLI::App* classify = app.add_subcommand("classify", "atoms and region flags");
    add_params(classify);
    classify->add_option("--output", output, "output path (default stdout)");

    CLI::App* atlas = app.add_subcommand("atlas", "mass-count grid over (r0, p0)");
    atlas->add_option("--p", p, "up-step probability for states >= 1")->required();
    atlas->add_option("--grid", grid, "lattice points per axis")->check(CLI::Range(2, 100000));
    atlas->add_option("--output", output, "output path (default stdout)");

    CLI::App* measure = app.add_subcommand("measure", "density samples, atoms, eta");
    add_params(measure);
    measure->add_option("--nodes", nodes, "quadrature nodes");
    measure->add_option("--format", format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    measure->add_option("--output", output, "output path (default stdout)");

    CLI::App* transition = app.add_subcommand("transition", "n-step probability");
    add_params(transition);
    transition->add_option("-i", si, "origin state")->required();
    transition->add_option("-j", sj, "target state")->required();
    transition->add_option("-n", n, "step count")->required();
    transition->add_option("--nodes", nodes, "quadrature nodes");
    transition->add_option("--method", method, "spectral|oracle|both")
        ->check(CLI::IsMember({"spectral", "oracle", "both"}));
    transition->add_option("--output", output, "output path (default stdout)");

    CLI::App* qsd = app.add_subcommand("qsd", "quasi-stationary distribution");
    add_params(qsd);
    qsd->add_option("--x", x, "family parameter in (eta, 1)")->required();
    qsd->add_option("--tol", tol, "tail tolerance");
    qsd->add_option("--output", output, "output path (default stdout)");

    CLI::App* ratio = app.add_subcommand("ratio-limit", "limit of P^n_ij / P^n_kl");
    add_params(ratio);
    ratio->add_option("-i", si, "numerator origin")->required();
    ratio->add_option("-j", sj, "numerator target")->required();
    ratio->add_option("-k", sk, "denominator origin")->required();
    ratio->add_option("-l", sl, "denominator target")->required();
    ratio->add_option("--parity", parity, "even|odd subsequence (requires r0 = 0)")
        ->check(CLI::IsMember({"even", "odd"}));
    ratio->add_option("--output", output, "output path (default stdout)");

    CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
    add_params(verify);
    verify->add_option("--nodes", nodes, "quadrature nodes");
    verify->add_option("--output", output, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        detail_cli::Sink sink(output, out);
        std::ostream& os = sink.stream();

        if (atlas->parsed()) {
            if (!(p > 0.0 && p < 1.0)) {
                err << "error: p must lie in the open interval (0, 1)\n";
                return 2;
            }
            write_atlas(os, p, grid);
            return 0;
        }

        const ChainParams cp = new_chain(p, p0, r0);
        if (classify->parsed()) {
            write_classify(os, cp);
        } else if (measure->parsed()) {
            if (nodes < 1) {
                err << "error: --nodes must be positive\n";
                return 2;
            }
            if (format == "csv") write_measure_csv(os, cp, nodes);
            else write_measure_json(os, cp, nodes);
        } else if (transition->parsed()) {
            JsonWriter jw(os);
            jw.begin_object();
            if (method == "oracle") {
                jw.key("oracle").value(oracle_transition(cp, si, sj, n));
            } else {
                const TransitionResult tr =
                    km_transition(cp, si, sj, n, nodes, method == "both");
                jw.key("spectral").value(tr.spectral);
                if (tr.oracle) {
                    jw.key("oracle").value(*tr.oracle);
                    jw.key("abs_diff").value(tr.abs_diff);
                }
            }
            jw.end_object();
            os << "\n";
        } else if (qsd->parsed()) {
            write_qsd(os, qsd_alpha(cp, x, tol));
        } else if (ratio->parsed()) {
            const RatioLimitResult r =
                parity.empty()
                    ? ratio_limit(cp, si, sj, sk, sl)
                    : ratio_limit_parity(cp, si, sj, sk, sl,
                                         parity == "even" ? Parity::even : Parity::odd);
            JsonWriter jw(os);
            jw.begin_object();
            jw.key("limit").value(r.limit);
            jw.key("mode").value(to_string(r.mode));
            jw.key("eta").value(r.eta_used);
            if (!parity.empty()) jw.key("no_mass_caveat").value(r.no_mass_caveat);
            jw.end_object();
            os << "\n";
        } else if (verify->parsed()) {
            const int vnodes = verify->count("--nodes") ? nodes : 2048;
            if (!write_verify(os, cp, vnodes)) return 1;
        }
        return 0;
    } catch (const detail_cli::Sink::UnwritableOutput& e) {
        err << "error: cannot open output path '" << e.path << "'\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace bdspectral::cli
