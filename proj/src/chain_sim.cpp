#include "ecsrep/chain_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ecsrep {

namespace {

struct StagePipeline {
    StageProbabilities probs;
    MixedLinkState top_state;
    RateReport report;
    std::size_t depth = 2; // log2(n_links)
};

StagePipeline derive_pipeline(const ChainConfig& cfg) {
    const LinkParams& p = cfg.link;
    StagePipeline pipe;
    pipe.depth = (cfg.n_links == 2) ? 1 : 2;

    RateReport& r = pipe.report;
    r.p0 = link_success_probability(p);
    r.f_link = link_fidelity(p);
    r.t0_seconds = link_time(p);

    const MixedLinkState level0{r.f_link, 1.0 - r.f_link, 0};
    r.f_swap1 = swap_fidelity(level0, p, Parity::odd);
    r.p1 = swap_success_probability(level0, p, AcceptanceSet::odd_only);
    MixedLinkState top{r.f_swap1, 1.0 - r.f_swap1, 1};

    if (pipe.depth == 2) {
        r.f_swap2 = swap_fidelity(top, p, Parity::odd);
        r.p2 = swap_success_probability(top, p, AcceptanceSet::odd_only);
        top = MixedLinkState{r.f_swap2, 1.0 - r.f_swap2, 2};
    }

    const double f_top = top.f_minus;
    r.p_ps = postselection_probability(f_top, p);
    r.f_postselected =
        postselected_corner(f_top, p.alpha_sq * (1.0 - p.tap), p.eta()).fidelity;

    pipe.top_state = top;
    pipe.probs.p0 = r.p0;
    pipe.probs.p1 = r.p1;
    pipe.probs.p2 = r.p2;
    pipe.probs.p_ps = r.p_ps;
    if (cfg.stages) {
        pipe.probs = *cfg.stages;
        r.p0 = pipe.probs.p0;
        r.p1 = pipe.probs.p1;
        r.p2 = pipe.probs.p2;
        r.p_ps = pipe.probs.p_ps;
    }
    return pipe;
}

void check_probability(double p, const char* name, bool required) {
    if (!required) return;
    if (!(p > 0.0 && p <= 1.0)) {
        std::ostringstream msg;
        msg << "simulate_chain: stage probability " << name << " = " << p
            << " outside (0,1]";
        throw std::invalid_argument(msg.str());
    }
}

struct PathResult {
    double seconds = 0.0;
    std::uint64_t link_attempts = 0;
};

struct TrialCounters {
    std::uint64_t swap_retries = 0;
    std::uint64_t postselection_retries = 0;
};

class TrialRunner {
  public:
    TrialRunner(const ChainConfig& cfg, const StagePipeline& pipe, PhiloxStream& rng)
        : cfg_(cfg), pipe_(pipe), rng_(rng), tau0_(cfg.link.L0_km / cfg.link.c_km_s) {}

    PathResult generate(std::size_t depth) {
        if (depth == 0) {
            const std::uint64_t attempts = rng_.geometric(pipe_.probs.p0);
            return {static_cast<double>(attempts) * tau0_, attempts};
        }
        const double p_swap = (depth == 1) ? pipe_.probs.p1 : pipe_.probs.p2;
        const double signal =
            (cfg_.swap_cost == SwapCost::communication)
                ? static_cast<double>(std::size_t{1} << (depth - 1)) * tau0_
                : 0.0;
        PathResult total;
        for (;;) {
            const PathResult a = generate(depth - 1);
            const PathResult b = generate(depth - 1);
            const bool a_slower = a.seconds >= b.seconds;
            total.seconds += std::max(a.seconds, b.seconds) + signal;
            total.link_attempts += a_slower ? a.link_attempts : b.link_attempts;
            if (rng_.uniform() < p_swap) return total;
            ++counters.swap_retries;
        }
    }

    TrialRecord run() {
        TrialRecord rec;
        PathResult total;
        if (!cfg_.postselection) {
            total = generate(pipe_.depth);
        } else {
            const double signal = (cfg_.swap_cost == SwapCost::communication)
                                      ? static_cast<double>(cfg_.n_links) * tau0_
                                      : 0.0;
            for (;;) {
                PathResult pair = generate(pipe_.depth);
                if (cfg_.pairing == PairingMode::synchronized) {
                    const PathResult second = generate(pipe_.depth);
                    if (second.seconds > pair.seconds) {
                        pair.seconds = second.seconds;
                        pair.link_attempts = second.link_attempts;
                    }
                }
                total.seconds += pair.seconds + signal;
                total.link_attempts += pair.link_attempts;
                if (rng_.uniform() < pipe_.probs.p_ps) break;
                ++counters.postselection_retries;
            }
        }
        rec.total_seconds = total.seconds;
        rec.link_attempts = total.link_attempts;
        rec.swap_retries = counters.swap_retries;
        rec.postselection_retries = counters.postselection_retries;
        rec.final_state = pipe_.top_state;
        return rec;
    }

    TrialCounters counters;

  private:
    const ChainConfig& cfg_;
    const StagePipeline& pipe_;
    PhiloxStream& rng_;
    const double tau0_;
};

double closed_form_seconds(const ChainConfig& cfg, const StagePipeline& pipe) {
    const double tau0 = cfg.link.L0_km / cfg.link.c_km_s;
    double t = tau0 / pipe.probs.p0;
    t *= 1.5 / pipe.probs.p1;
    if (pipe.depth == 2) t *= 1.5 / pipe.probs.p2;
    if (cfg.postselection) {
        t /= pipe.probs.p_ps;
        if (cfg.pairing == PairingMode::synchronized) t *= 1.5;
    }
    return t;
}

} // namespace

double sample_link_time(const LinkParams& p, PhiloxStream& rng) {
    p.validate();
    const double p0 = link_success_probability(p);
    if (!(p0 > 0.0))
        throw std::domain_error("sample_link_time: generation probability is zero");
    return static_cast<double>(rng.geometric(p0)) * (p.L0_km / p.c_km_s);
}

ChainReport simulate_chain(const ChainConfig& cfg) {
    if (cfg.n_links != 2 && cfg.n_links != 4)
        throw std::invalid_argument("simulate_chain: n_links must be 2 or 4");
    if (cfg.n_trials == 0)
        throw std::invalid_argument("simulate_chain: need at least one trial");
    cfg.link.validate();

    const StagePipeline pipe = derive_pipeline(cfg);
    check_probability(pipe.probs.p0, "p0", true);
    check_probability(pipe.probs.p1, "p1", true);
    check_probability(pipe.probs.p2, "p2", pipe.depth == 2);
    check_probability(pipe.probs.p_ps, "p_ps", cfg.postselection);

    ChainReport rep;
    rep.trials.reserve(cfg.n_trials);
    long double sum = 0.0L, sum_sq = 0.0L;
    for (std::size_t t = 0; t < cfg.n_trials; ++t) {
        PhiloxStream rng(cfg.rng_seed, t);
        TrialRunner runner(cfg, pipe, rng);
        rep.trials.push_back(runner.run());
        const double x = rep.trials.back().total_seconds;
        sum += x;
        sum_sq += static_cast<long double>(x) * x;
    }

    const double n = static_cast<double>(cfg.n_trials);
    rep.mean_seconds = static_cast<double>(sum / n);
    if (cfg.n_trials > 1) {
        const long double var =
            std::max(0.0L, (sum_sq - sum * sum / n) / (n - 1.0L));
        rep.stderr_seconds = static_cast<double>(std::sqrt(var / n));
    }
    rep.stages = pipe.probs;
    rep.analytic = pipe.report;
    rep.analytic_seconds = closed_form_seconds(cfg, pipe);
    rep.analytic.total_seconds = rep.analytic_seconds;
    return rep;
}

} // namespace ecsrep
