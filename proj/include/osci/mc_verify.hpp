#pragma once

// Seedable Monte Carlo verification of the coverage bounds, empirical
// worst-offset search, and the adversarial location game.
//
// Reproducibility contract: replicates are partitioned into fixed blocks of
// 65536 draws; block b uses an mt19937_64 engine seeded with
// splitmix64(seed + golden * (b+1)), and each replicate consumes exactly one
// 64-bit draw mapped to the open unit interval as ((v >> 11) + 0.5) * 2^-53.
// Hit counts are integer sums over blocks, so reports are bit-identical for
// every thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "osci/densities.hpp"
#include "osci/location_ci.hpp"
#include "osci/scale_ci.hpp"

namespace osci {

namespace detail {

inline constexpr std::uint64_t kBlockSize = 65536;

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (block + 1));
}

inline double to_unit_open(std::uint64_t v) {
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("OSCI_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<int>(n);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace detail

inline double mc_stderr(double p, std::uint64_t reps) {
    if (reps == 0) return 0.0;
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(reps));
}

enum class SimKind { location_parametric, location_nonparametric, scale };

inline const char* to_string(SimKind k) {
    switch (k) {
        case SimKind::location_parametric: return "location_parametric";
        case SimKind::location_nonparametric: return "location_nonparametric";
        case SimKind::scale: return "scale";
    }
    return "?";
}

struct SimConfig {
    SimKind kind = SimKind::location_nonparametric;
    std::string density = "normal";
    double mu = 0.0;
    double sigma = 1.0;
    double a = 0.0;
    double t = 0.0;          // location kinds
    double t1 = 0.0;         // scale kind
    double t2 = kInf;        // scale kind
    double M = kInf;         // scale kind prior ratio
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
};

struct CoverageReport {
    SimConfig config;
    std::uint64_t hits = 0;
    std::uint64_t reps = 0;
    double empirical_coverage = 0.0;
    double theoretical_bound = 0.0;
    double mc_stderr = 0.0;
    double slack = 0.0;  // empirical - bound
    std::uint64_t seed = 0;
    bool hypothesis_violated = false;  // prior |mu-a| <= sigma*M (scale) or f in the
                                       // unimodal symmetric class (nonparametric)
};

/// Draws x = mu + sigma * Y by inverse-cdf sampling and counts coverage of mu
/// (location kinds) or sigma (scale kind). The hit predicate is evaluated in
/// standardized coordinates (y, alpha), which is what makes coverage exactly
/// invariant under shifting and rescaling (mu, sigma, a) with the same seed.
inline CoverageReport simulate_coverage(const SimConfig& config, int threads = 0) {
    if (config.reps < 1) throw std::invalid_argument("simulate_coverage: reps >= 1");
    if (!(config.sigma > 0.0)) throw std::invalid_argument("simulate_coverage: sigma > 0");
    const SymmetricDensity density = make_builtin(config.density);
    const double alpha = (config.a - config.mu) / config.sigma;

    CoverageReport rep;
    rep.config = config;
    rep.reps = config.reps;
    rep.seed = config.seed;

    const bool is_scale = config.kind == SimKind::scale;
    if (is_scale) {
        detail::check_scale_ts(config.t1, config.t2);
        if (!(config.M > 0.0)) throw std::invalid_argument("simulate_coverage: M > 0");
        rep.hypothesis_violated = !(std::abs(config.mu - config.a) <= config.sigma * config.M);
        rep.theoretical_bound = scale_coverage_bound(config.t1, config.t2, config.M, density);
    } else {
        if (!(config.t > 1.0)) throw std::invalid_argument("simulate_coverage: t must exceed 1");
        if (config.kind == SimKind::location_parametric) {
            rep.theoretical_bound = 1.0 - beta_star(config.t, density).beta_star;
        } else {
            rep.theoretical_bound = 1.0 - robbins_bound(config.t);
            rep.hypothesis_violated = !verify_class_membership(density, 512).in_class;
        }
    }

    const double t = config.t;
    const double t1 = config.t1;
    const double t2 = config.t2;
    const auto& quantile = density.quantile;
    auto run_block = [&](std::uint64_t block, std::uint64_t count) -> std::uint64_t {
        std::mt19937_64 eng(detail::block_seed(config.seed, block));
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < count; ++i) {
            const double y = quantile(detail::to_unit_open(eng()));
            const double dev = std::abs(y - alpha);
            bool hit;
            if (is_scale) {
                hit = t1 <= dev && (std::isinf(t2) || dev <= t2);
            } else {
                hit = std::abs(y) <= t * dev;
            }
            hits += hit ? 1 : 0;
        }
        return hits;
    };

    const std::uint64_t n_blocks = (config.reps + detail::kBlockSize - 1) / detail::kBlockSize;
    const int n_threads = std::min<std::uint64_t>(detail::resolve_threads(threads), n_blocks);
    std::uint64_t total_hits = 0;
    if (n_threads <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) {
            const std::uint64_t count =
                std::min(detail::kBlockSize, config.reps - b * detail::kBlockSize);
            total_hits += run_block(b, count);
        }
    } else {
        std::vector<std::uint64_t> partial(static_cast<std::size_t>(n_threads), 0);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int w = 0; w < n_threads; ++w) {
            pool.emplace_back([&, w]() {
                std::uint64_t h = 0;
                for (std::uint64_t b = w; b < n_blocks; b += n_threads) {
                    const std::uint64_t count =
                        std::min(detail::kBlockSize, config.reps - b * detail::kBlockSize);
                    h += run_block(b, count);
                }
                partial[static_cast<std::size_t>(w)] = h;
            });
        }
        for (auto& th : pool) th.join();
        for (const auto h : partial) total_hits += h;
    }

    rep.hits = total_hits;
    rep.empirical_coverage =
        static_cast<double>(total_hits) / static_cast<double>(config.reps);
    rep.mc_stderr = mc_stderr(rep.empirical_coverage, config.reps);
    rep.slack = rep.empirical_coverage - rep.theoretical_bound;
    return rep;
}

struct WorstAlphaPoint {
    double alpha = 0.0;
    double miscoverage = 0.0;
    double stderr_mc = 0.0;
};

struct WorstAlphaResult {
    double alpha_worst = 0.0;
    double miscoverage_worst = 0.0;
    std::vector<WorstAlphaPoint> curve;
};

/// Empirical counterpart of the worst-offset search: simulates each alpha on
/// the grid (a = 0, sigma = 1, mu = -alpha, common seed across cells) and
/// returns the alpha with the largest empirical miscoverage plus the full
/// curve for plotting.
inline WorstAlphaResult empirical_worst_case_alpha(SimKind kind, double t_or_t1, double t2,
                                                   const std::string& density,
                                                   std::span<const double> alpha_grid,
                                                   std::uint64_t reps, std::uint64_t seed,
                                                   int threads = 0) {
    if (alpha_grid.empty()) {
        throw std::invalid_argument("empirical_worst_case_alpha: empty alpha grid");
    }
    WorstAlphaResult out;
    out.curve.reserve(alpha_grid.size());
    bool first = true;
    for (const double alpha : alpha_grid) {
        SimConfig cfg;
        cfg.kind = kind;
        cfg.density = density;
        cfg.a = 0.0;
        cfg.sigma = 1.0;
        cfg.mu = -alpha;
        if (kind == SimKind::scale) {
            cfg.t1 = t_or_t1;
            cfg.t2 = t2;
            cfg.M = kInf;
        } else {
            cfg.t = t_or_t1;
        }
        cfg.reps = reps;
        cfg.seed = seed;
        const CoverageReport rep = simulate_coverage(cfg, threads);
        const double miss = 1.0 - rep.empirical_coverage;
        out.curve.push_back({alpha, miss, rep.mc_stderr});
        if (first || miss > out.miscoverage_worst) {
            out.miscoverage_worst = miss;
            out.alpha_worst = alpha;
            first = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// The adversarial game: each round the adversary picks a unimodal symmetric
// density and a location mu; the environment draws x ~ f(x - mu); the player
// bets on x +- t|x| and wins $1 on a cover, loses $5 on a miss.
// ---------------------------------------------------------------------------

struct MuRule {
    enum class Kind { constant, sequence, gaussian };
    Kind kind = Kind::constant;
    double value = 0.0;
    std::vector<double> sequence;
    double mean = 0.0;
    double sd = 1.0;
};

struct AdversaryStrategy {
    enum class Mode { fixed, cycle, seeded_random };
    Mode mode = Mode::fixed;
    std::vector<SymmetricDensity> densities;
    MuRule mu_rule;
    std::uint64_t seed = 0;
};

struct GameRound {
    std::uint64_t round = 0;
    std::string density;
    double mu = 0.0;
    double x = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool covered = false;
};

struct GameRecord {
    std::uint64_t rounds = 0;
    std::uint64_t covers = 0;
    double player_payoff = 0.0;  // covers - 5 * (rounds - covers)
    std::vector<GameRound> log;
};

inline GameRecord play_game(const AdversaryStrategy& strategy, double t, std::uint64_t rounds,
                            std::uint64_t seed) {
    if (!(t > 1.0)) throw std::domain_error("play_game: t must exceed 1");
    if (strategy.densities.empty()) {
        throw std::invalid_argument("play_game: strategy has no densities");
    }
    for (const auto& d : strategy.densities) {
        const auto rep = verify_class_membership(d, 512);
        if (!rep.in_class) {
            throw std::invalid_argument("play_game: density '" + d.name +
                                        "' is not in the unimodal symmetric class");
        }
    }
    std::mt19937_64 env(detail::block_seed(seed, 0));
    std::mt19937_64 adv(detail::block_seed(strategy.seed, 1));

    GameRecord rec;
    rec.rounds = rounds;
    rec.log.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(rounds, 1u << 22)));
    for (std::uint64_t r = 0; r < rounds; ++r) {
        std::size_t di = 0;
        switch (strategy.mode) {
            case AdversaryStrategy::Mode::fixed: di = 0; break;
            case AdversaryStrategy::Mode::cycle: di = r % strategy.densities.size(); break;
            case AdversaryStrategy::Mode::seeded_random:
                di = static_cast<std::size_t>(adv() % strategy.densities.size());
                break;
        }
        const SymmetricDensity& f = strategy.densities[di];
        double mu = 0.0;
        switch (strategy.mu_rule.kind) {
            case MuRule::Kind::constant: mu = strategy.mu_rule.value; break;
            case MuRule::Kind::sequence:
                if (strategy.mu_rule.sequence.empty()) {
                    throw std::invalid_argument("play_game: empty mu sequence");
                }
                mu = strategy.mu_rule.sequence[r % strategy.mu_rule.sequence.size()];
                break;
            case MuRule::Kind::gaussian:
                mu = strategy.mu_rule.mean +
                     strategy.mu_rule.sd *
                         detail::normal_quantile(detail::to_unit_open(adv()));
                break;
        }
        const double x = mu + f.quantile(detail::to_unit_open(env()));
        const double half = t * std::abs(x);
        const bool covered = x - half <= mu && mu <= x + half;
        rec.covers += covered ? 1 : 0;
        rec.log.push_back({r, f.name, mu, x, x - half, x + half, covered});
    }
    rec.player_payoff = static_cast<double>(rec.covers) -
                        5.0 * static_cast<double>(rec.rounds - rec.covers);
    return rec;
}

}  // namespace osci
