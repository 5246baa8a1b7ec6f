#include "ecsrep/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ecsrep/analytic.hpp"
#include "ecsrep/chain_sim.hpp"
#include "ecsrep/config.hpp"
#include "ecsrep/optimizer.hpp"
#include "ecsrep/oracle.hpp"

namespace ecsrep {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Flags {
    std::string config_path;
    std::optional<double> alpha_sq, tap, L0, eta_d, eta_m, floor;
    std::optional<std::uint64_t> seed, trials;
    std::optional<std::uint64_t> n_links;
    std::string out_dir;
    std::string figure;
    bool json = false;
    bool sweep = false;
};

RunConfig effective_config(const Flags& fl) {
    RunConfig cfg;
    if (!fl.config_path.empty()) cfg = load_config_file(fl.config_path);
    if (fl.alpha_sq) cfg.link.alpha_sq = *fl.alpha_sq;
    if (fl.tap) cfg.link.tap = *fl.tap;
    if (fl.L0) cfg.link.L0_km = *fl.L0;
    if (fl.eta_d) cfg.link.eta_d = *fl.eta_d;
    if (fl.eta_m) cfg.link.eta_m = *fl.eta_m;
    if (fl.floor) cfg.search.fidelity_floor = *fl.floor;
    if (fl.seed) cfg.chain.rng_seed = *fl.seed;
    if (fl.trials) cfg.chain.n_trials = static_cast<std::size_t>(*fl.trials);
    if (fl.n_links) cfg.chain.n_links = static_cast<std::size_t>(*fl.n_links);
    if (!fl.out_dir.empty()) cfg.output.directory = fl.out_dir;
    if (fl.json) cfg.output.json_summary = true;
    cfg.finalize();
    return cfg;
}

std::ofstream open_table(const std::string& directory, const std::string& name,
                         std::string& path_out) {
    std::filesystem::create_directories(directory);
    path_out = (std::filesystem::path(directory) / name).string();
    std::ofstream out(path_out, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot write '" + path_out + "'");
    return out;
}

std::vector<double> tap_sweep_grid() {
    std::vector<double> taps;
    for (int i = 0; i < 49; ++i) taps.push_back(0.001 + 0.005 * i);
    return taps;
}

int cmd_link(const RunConfig& cfg, bool sweep) {
    const LinkParams& p = cfg.link;
    const double f = link_fidelity(p), p0 = link_success_probability(p), t0 = link_time(p);
    if (cfg.output.json_summary) {
        ojson j;
        j["alpha_sq"] = p.alpha_sq;
        j["tap"] = p.tap;
        j["L0_km"] = p.L0_km;
        j["F_link"] = f;
        j["P0"] = p0;
        j["T0_seconds"] = t0;
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "elementary link: alpha_sq=" << fmt(p.alpha_sq) << " tap=" << fmt(p.tap)
              << " L0_km=" << fmt(p.L0_km) << " eta_d=" << fmt(p.eta_d) << "\n"
              << "F_link = " << fmt(f) << "\n"
              << "P0 = " << fmt(p0) << "\n"
              << "T0_seconds = " << fmt(t0) << "\n";
    if (sweep) {
        std::cout << "tap,F_link,T0_seconds\n";
        for (double tap : tap_sweep_grid()) {
            LinkParams q = p;
            q.tap = tap;
            std::cout << fmt(tap) << "," << fmt(link_fidelity(q)) << ","
                      << fmt(link_time(q)) << "\n";
        }
    }
    return 0;
}

int cmd_swap(const RunConfig& cfg) {
    const LinkParams& p = cfg.link;
    MixedLinkState in;
    in.f_minus = link_fidelity(p);
    in.f_plus = 1.0 - in.f_minus;
    const double f_odd = swap_fidelity(in, p, Parity::odd);
    const double f_even = swap_fidelity(in, p, Parity::even);
    const double p_succ = swap_success_probability(in, p, AcceptanceSet::odd_only);
    if (cfg.output.json_summary) {
        ojson j;
        j["F_input"] = in.f_minus;
        j["F_swap_odd"] = f_odd;
        j["F_swap_even"] = f_even;
        j["P_success_odd"] = p_succ;
        ojson rows = ojson::array();
        for (unsigned n = 1; n <= 6; ++n) {
            const Parity par = (n % 2 == 1) ? Parity::odd : Parity::even;
            ojson r;
            r["n"] = n;
            r["parity"] = (par == Parity::odd) ? "odd" : "even";
            r["P_n"] = swap_probability_n(in, p, n, par);
            rows.push_back(std::move(r));
        }
        j["counts"] = std::move(rows);
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "station swap on the link output mixture (F_input = " << fmt(in.f_minus)
              << ")\n"
              << "F_swap_odd = " << fmt(f_odd) << "\n"
              << "F_swap_even = " << fmt(f_even) << "\n"
              << "P_success_odd = " << fmt(p_succ) << "\n"
              << "n,parity,P_n\n";
    for (unsigned n = 1; n <= 6; ++n) {
        const Parity par = (n % 2 == 1) ? Parity::odd : Parity::even;
        std::cout << n << "," << ((par == Parity::odd) ? "odd" : "even") << ","
                  << fmt(swap_probability_n(in, p, n, par)) << "\n";
    }
    return 0;
}

int cmd_chain(const RunConfig& cfg) {
    const ChainReport rep = simulate_chain(cfg.chain);
    if (cfg.output.json_summary) {
        ojson j;
        j["n_links"] = cfg.chain.n_links;
        j["n_trials"] = cfg.chain.n_trials;
        j["seed"] = cfg.chain.rng_seed;
        j["mean_seconds"] = rep.mean_seconds;
        j["stderr_seconds"] = rep.stderr_seconds;
        j["analytic_seconds"] = rep.analytic_seconds;
        j["p0"] = rep.stages.p0;
        j["p1"] = rep.stages.p1;
        j["p2"] = rep.stages.p2;
        j["p_ps"] = rep.stages.p_ps;
        j["f_postselected"] = rep.analytic.f_postselected;
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << "chain: n_links=" << cfg.chain.n_links << " trials=" << cfg.chain.n_trials
              << " seed=" << cfg.chain.rng_seed << "\n"
              << "mean_seconds = " << fmt(rep.mean_seconds) << "\n"
              << "stderr_seconds = " << fmt(rep.stderr_seconds) << "\n"
              << "analytic_seconds = " << fmt(rep.analytic_seconds) << "\n"
              << "stage_probabilities p0=" << fmt(rep.stages.p0) << " p1="
              << fmt(rep.stages.p1) << " p2=" << fmt(rep.stages.p2) << " p_ps="
              << fmt(rep.stages.p_ps) << "\n"
              << "f_postselected = " << fmt(rep.analytic.f_postselected) << "\n";
    return 0;
}

int cmd_figures(const RunConfig& cfg, const std::string& which) {
    const std::vector<double> taps = tap_sweep_grid();
    std::string path;
    std::ofstream out = open_table(cfg.output.directory, which + ".csv", path);

    const auto with_drive = [&](double a2, double tap) {
        LinkParams q = cfg.link;
        q.alpha_sq = a2;
        q.tap = tap;
        return q;
    };

    if (which == "fig2" || which == "fig3") {
        const std::vector<double> amps = {0.5, 1.0, 2.0};
        const char* stem = (which == "fig2") ? "F_link" : "T0_seconds";
        out << "tap";
        for (double a2 : amps) out << "," << stem << "_alpha_sq_" << fmt(a2);
        out << "\n";
        for (double tap : taps) {
            out << fmt(tap);
            for (double a2 : amps) {
                const LinkParams q = with_drive(a2, tap);
                out << "," << fmt(which == "fig2" ? link_fidelity(q) : link_time(q));
            }
            out << "\n";
        }
    } else if (which == "fig5") {
        const std::vector<double> amps = {1.0, 2.0, 4.0};
        out << "tap";
        for (double a2 : amps) out << ",F_swap1_alpha_sq_" << fmt(a2);
        out << "\n";
        for (double tap : taps) {
            out << fmt(tap);
            for (double a2 : amps) {
                const LinkParams q = with_drive(a2, tap);
                MixedLinkState in;
                in.f_minus = link_fidelity(q);
                in.f_plus = 1.0 - in.f_minus;
                out << "," << fmt(swap_fidelity(in, q, Parity::odd));
            }
            out << "\n";
        }
    } else { // fig6
        const std::vector<double> amps = {0.05, 0.1, 0.3};
        out << "tap";
        for (double a2 : amps) out << ",F_swap1_alpha_sq_" << fmt(a2);
        for (double a2 : amps) out << ",F_postselected_alpha_sq_" << fmt(a2);
        out << "\n";
        for (double tap : taps) {
            out << fmt(tap);
            std::vector<double> f1(amps.size());
            for (std::size_t i = 0; i < amps.size(); ++i) {
                const LinkParams q = with_drive(amps[i], tap);
                MixedLinkState in;
                in.f_minus = link_fidelity(q);
                in.f_plus = 1.0 - in.f_minus;
                f1[i] = swap_fidelity(in, q, Parity::odd);
                out << "," << fmt(f1[i]);
            }
            for (std::size_t i = 0; i < amps.size(); ++i) {
                const LinkParams q = with_drive(amps[i], tap);
                const double amp_sq = q.alpha_sq * (1.0 - q.tap);
                out << "," << fmt(postselected_corner(f1[i], amp_sq, q.eta()).fidelity);
            }
            out << "\n";
        }
    }
    out.flush();
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_optimize(const RunConfig& cfg) {
    const OptimizeResult res = optimize(cfg.search);
    std::string path;
    std::ofstream out = open_table(cfg.output.directory, "surface.csv", path);
    out << "alpha_sq,tap,T_seconds,fidelity,feasible\n";
    for (const SurfacePoint& pt : res.surface)
        out << fmt(pt.alpha_sq) << "," << fmt(pt.tap) << "," << fmt(pt.t_seconds) << ","
            << fmt(pt.fidelity) << "," << (pt.feasible ? 1 : 0) << "\n";
    out.flush();

    if (cfg.output.json_summary) {
        ojson j;
        j["feasible"] = res.feasible;
        j["alpha_sq"] = res.best.alpha_sq;
        j["tap"] = res.best.tap;
        j["T_seconds"] = res.best.t_seconds;
        j["fidelity"] = res.best.fidelity;
        j["evaluations"] = res.evaluations;
        j["surface_path"] = path;
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::cout << (res.feasible ? "optimum (fidelity floor met)"
                               : "no feasible point; best fidelity shown")
              << "\n"
              << "alpha_sq = " << fmt(res.best.alpha_sq) << "\n"
              << "tap = " << fmt(res.best.tap) << "\n"
              << "T_seconds = " << fmt(res.best.t_seconds) << "\n"
              << "fidelity = " << fmt(res.best.fidelity) << "\n"
              << "evaluations = " << res.evaluations << "\n"
              << "wrote " << path << "\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    const VerifyReport rep = run_verification(cfg.link);
    std::size_t passed = 0;
    for (const VerifyCheck& c : rep.checks) {
        if (c.pass) ++passed;
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name
                  << "  measured=" << fmt(c.measured) << " expected=" << fmt(c.expected)
                  << " tol=" << fmt(c.tolerance) << "\n";
    }
    std::cout << "verification: " << passed << "/" << rep.checks.size()
              << " checks passed\n";
    return rep.all_pass() ? 0 : 2;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"performance engine for entangled-coherent-state repeater chains"};
    app.require_subcommand(1);

    Flags fl;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", fl.config_path, "config file path");
        sub->add_option("--alpha-sq", fl.alpha_sq, "cat amplitude squared");
        sub->add_option("--tap", fl.tap, "tapped fraction sin^2(theta)");
        sub->add_option("--L0", fl.L0, "elementary link length [km]");
        sub->add_option("--eta-d", fl.eta_d, "detector efficiency");
        sub->add_option("--eta-m", fl.eta_m, "memory retrieval efficiency");
        sub->add_option("--out", fl.out_dir, "output directory for tables");
        sub->add_flag("--json", fl.json, "print a structured summary");
    };

    CLI::App* link = app.add_subcommand("link", "elementary-link figures of merit");
    add_common(link);
    link->add_flag("--sweep", fl.sweep, "append a tap sweep table");

    CLI::App* swap = app.add_subcommand("swap", "station counting statistics");
    add_common(swap);

    CLI::App* chain = app.add_subcommand("chain", "Monte Carlo chain timing");
    add_common(chain);
    chain->add_option("--seed", fl.seed, "simulation seed");
    chain->add_option("--trials", fl.trials, "number of trials");
    chain->add_option("--n-links", fl.n_links, "chain length (2 or 4)");

    CLI::App* figures = app.add_subcommand("figures", "regenerate curve tables");
    add_common(figures);
    figures->add_option("--figure", fl.figure, "one of fig2, fig3, fig5, fig6")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig5", "fig6"}));

    CLI::App* optimize = app.add_subcommand("optimize", "operating-point search");
    add_common(optimize);
    optimize->add_option("--floor", fl.floor, "postselected-fidelity floor");

    CLI::App* verify = app.add_subcommand("verify", "oracle-vs-analytic check suite");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        const RunConfig cfg = effective_config(fl);
        if (link->parsed()) return cmd_link(cfg, fl.sweep);
        if (swap->parsed()) return cmd_swap(cfg);
        if (chain->parsed()) return cmd_chain(cfg);
        if (figures->parsed()) return cmd_figures(cfg, fl.figure);
        if (optimize->parsed()) return cmd_optimize(cfg);
        if (verify->parsed()) return cmd_verify(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}

} // namespace ecsrep
