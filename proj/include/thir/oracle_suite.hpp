#ifndef THIR_ORACLE_SUITE_HPP
#define THIR_ORACLE_SUITE_HPP

// Brute-force equivalence suites: randomized small instances on which the
// optimized detector paths are compared against the literal reference
// implementations in thir::naive. Used by the `oracle-check` CLI command and
// by the acceptance tests.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "thir/detectors.hpp"
#include "thir/frontend.hpp"
#include "thir/math.hpp"
#include "thir/model.hpp"
#include "thir/naive.hpp"
#include "thir/rng.hpp"

namespace thir::oracle {

struct InstanceOptions {
    int max_users = 4;
    int max_frames = 3;
    int max_symbols = 2;
    int max_taps = 4;
    int max_distinct = 8;  // reject instances with larger collision sets
    double min_noise = 0.3;
    double max_noise = 1.5;
    double max_interferer_db = 6.0;
    double max_prior = 6.0;
};

struct Instance {
    SystemConfig cfg;
    CodeBook codes;
    std::vector<ChannelRealization> channels;
    SamplingPlan plan;
    SymbolMatrix bits;
    std::vector<std::vector<CollisionDescriptor>> descs;
    FrontendSamples noisy;
    FrontendSamples clean;
    std::vector<double> lambda2;
    double sigma_n2 = 0.0;
};

inline Instance random_instance(SplitRng& rng,
                                const InstanceOptions& opt = {}) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Instance inst;
        SystemConfig& cfg = inst.cfg;
        cfg.num_users = 1 + rng.next_int(opt.max_users);
        cfg.frames_per_symbol = 1 + rng.next_int(opt.max_frames);
        cfg.symbols_per_packet = 1 + rng.next_int(opt.max_symbols);
        cfg.channel_taps = 1 + rng.next_int(opt.max_taps);
        cfg.sampled_paths = 1 + rng.next_int(cfg.channel_taps);
        cfg.chips_per_frame = cfg.channel_taps + 1 + rng.next_int(6);
        cfg.no_ifi = rng.next_int(2) == 1;
        cfg.iterations = 1;
        cfg.noise_variance =
            opt.min_noise + rng.next_double() * (opt.max_noise - opt.min_noise);
        inst.sigma_n2 = cfg.noise_variance;

        inst.channels.reserve(static_cast<std::size_t>(cfg.num_users));
        for (int k = 0; k < cfg.num_users; ++k) {
            std::vector<double> taps(static_cast<std::size_t>(cfg.channel_taps));
            // First tap bounded away from zero so every user keeps signal
            // energy inside its sampled window; later taps are sparse.
            taps[0] = rng.next_sign() * (0.5 + 0.5 * std::abs(rng.next_gaussian()));
            for (std::size_t l = 1; l < taps.size(); ++l) {
                taps[l] = rng.next_int(5) == 0 ? 0.0 : rng.next_gaussian();
            }
            auto chan = ChannelRealization::from_taps(std::move(taps));
            if (k > 0) {
                chan.power_scale = db_to_amplitude(
                    rng.next_double() * opt.max_interferer_db);
            }
            inst.channels.push_back(std::move(chan));
        }

        inst.codes = generate_codes(cfg, rng);
        inst.plan = SamplingPlan::first_m(cfg);
        inst.bits = generate_bits(cfg, rng);
        inst.descs = build_collisions(inst.codes, inst.channels, inst.plan, cfg);

        int max_distinct = 0;
        for (const auto& user_descs : inst.descs) {
            for (const auto& d : user_descs) {
                max_distinct = std::max(max_distinct, d.num_interferers());
            }
        }
        if (max_distinct > opt.max_distinct) continue;

        const auto signal =
            synthesize_signal(cfg, inst.codes, inst.channels, inst.bits);
        inst.clean = run_frontend(signal, inst.codes, inst.channels, inst.plan, cfg);
        auto noisy = signal;
        add_noise(noisy, inst.sigma_n2, rng);
        inst.noisy = run_frontend(noisy, inst.codes, inst.channels, inst.plan, cfg);

        const std::size_t total = static_cast<std::size_t>(cfg.num_users) *
                                  static_cast<std::size_t>(cfg.pulses_per_user());
        inst.lambda2.resize(total);
        for (double& l : inst.lambda2) {
            l = (2.0 * rng.next_double() - 1.0) * opt.max_prior;
        }
        return inst;
    }
    throw ConfigError("random_instance: rejection loop exhausted");
}

struct SuiteResult {
    std::string name;
    int trials = 0;
    double worst = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

// Exact pulse LLR vs the naive direct-enumeration transcription.
inline SuiteResult check_exact_llr(int trials, std::uint64_t seed) {
    SuiteResult res{"exact_llr_vs_naive", trials, 0.0, 1e-9, false, ""};
    SplitRng rng(seed, 101);
    DetectorConfig det;
    det.max_exact_bits = 16;
    for (int t = 0; t < trials; ++t) {
        const auto inst = random_instance(rng);
        for (int k = 0; k < inst.cfg.num_users; ++k) {
            for (int j = 0; j < inst.cfg.pulses_per_user(); ++j) {
                const double r =
                    inst.noisy.combined[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                const double fast = pulse_llr_exact(
                    inst.descs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)], r,
                    inst.lambda2, inst.sigma_n2, det);
                const double slow = naive::pulse_llr_exact(
                    inst.cfg, inst.codes, inst.channels, inst.plan, k, j, r,
                    inst.lambda2, inst.sigma_n2);
                res.worst = std::max(res.worst, std::abs(fast - slow));
            }
        }
    }
    res.pass = res.worst <= res.tolerance;
    return res;
}

// Gaussian-LC LLR vs its naive transcription at random finite thresholds.
inline SuiteResult check_gaussian_lc_llr(int trials, std::uint64_t seed) {
    SuiteResult res{"gaussian_lc_llr_vs_naive", trials, 0.0, 1e-9, false, ""};
    SplitRng rng(seed, 102);
    for (int t = 0; t < trials; ++t) {
        const auto inst = random_instance(rng);
        DetectorConfig det;
        det.mode = DetectorMode::GaussianLc;
        det.threshold_db = -5.0 + 13.0 * rng.next_double();
        for (int k = 0; k < inst.cfg.num_users; ++k) {
            for (int j = 0; j < inst.cfg.pulses_per_user(); ++j) {
                const double r =
                    inst.noisy.combined[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                const double fast = pulse_llr_gaussian_lc(
                    inst.descs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)], r,
                    inst.lambda2, inst.sigma_n2, det);
                const double slow = naive::pulse_llr_gaussian_lc(
                    inst.cfg, inst.codes, inst.channels, inst.plan, k, j, r,
                    inst.lambda2, inst.sigma_n2, det.threshold_db);
                res.worst = std::max(res.worst, std::abs(fast - slow));
            }
        }
    }
    res.pass = res.worst <= res.tolerance;
    return res;
}

// Sum of prior_prob over every assignment must be exactly one.
inline SuiteResult check_prior_normalization(int trials, std::uint64_t seed) {
    SuiteResult res{"prior_normalization", trials, 0.0, 1e-12, false, ""};
    SplitRng rng(seed, 103);
    for (int t = 0; t < trials; ++t) {
        const int n = rng.next_int(11);
        std::vector<double> lambda2(static_cast<std::size_t>(n));
        for (double& l : lambda2) l = (2.0 * rng.next_double() - 1.0) * 10.0;
        double sum = 0.0;
        std::vector<int> b(static_cast<std::size_t>(n));
        for (long mask = 0; mask < (1L << n); ++mask) {
            for (int i = 0; i < n; ++i) {
                b[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? 1 : -1;
            }
            sum += prior_prob(b, lambda2);
        }
        res.worst = std::max(res.worst, std::abs(sum - 1.0));
    }
    res.pass = res.worst <= res.tolerance;
    return res;
}

// Noiseless combined samples must be reproduced by the descriptor
// decomposition A b + sum_i g_i b_i.
inline SuiteResult check_reconstruction(int trials, std::uint64_t seed) {
    SuiteResult res{"collision_reconstruction", trials, 0.0, 1e-10, false, ""};
    SplitRng rng(seed, 104);
    for (int t = 0; t < trials; ++t) {
        const auto inst = random_instance(rng);
        for (int k = 0; k < inst.cfg.num_users; ++k) {
            for (int j = 0; j < inst.cfg.pulses_per_user(); ++j) {
                const auto& d = inst.descs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                double model = d.amp * inst.bits.pulse_bit(k, j, inst.cfg);
                for (int i = 0; i < d.num_interferers(); ++i) {
                    const auto& ref = d.interferers[static_cast<std::size_t>(i)];
                    model += d.combined[static_cast<std::size_t>(i)] *
                             inst.bits.pulse_bit(ref.user, ref.pulse, inst.cfg);
                }
                const double actual =
                    inst.clean.combined[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                res.worst = std::max(res.worst, std::abs(model - actual));
            }
        }
    }
    res.pass = res.worst <= res.tolerance;
    return res;
}

// gaussian_lc with T = +inf must equal the exact detector bit for bit.
inline SuiteResult check_lc_reduction(int trials, std::uint64_t seed) {
    SuiteResult res{"lc_reduction_identity", trials, 0.0, 0.0, false, ""};
    SplitRng rng(seed, 105);
    DetectorConfig lc;
    lc.mode = DetectorMode::GaussianLc;
    lc.threshold_db = std::numeric_limits<double>::infinity();
    DetectorConfig exact;
    int mismatches = 0;
    for (int t = 0; t < trials; ++t) {
        const auto inst = random_instance(rng);
        for (int k = 0; k < inst.cfg.num_users; ++k) {
            for (int j = 0; j < inst.cfg.pulses_per_user(); ++j) {
                const double r =
                    inst.noisy.combined[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                const auto& d = inst.descs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                const double a = pulse_llr_gaussian_lc(d, r, inst.lambda2,
                                                       inst.sigma_n2, lc);
                const double b =
                    pulse_llr_exact(d, r, inst.lambda2, inst.sigma_n2, exact);
                if (a != b) ++mismatches;
            }
        }
    }
    res.worst = mismatches;
    res.pass = mismatches == 0;
    res.detail = "bitwise mismatches: " + std::to_string(mismatches);
    return res;
}

// Noiseless SIC with saturated correct priors must decide every symbol
// correctly.
inline SuiteResult check_sic_perfect_priors(int trials, std::uint64_t seed) {
    SuiteResult res{"sic_perfect_cancellation", trials, 0.0, 0.0, false, ""};
    SplitRng rng(seed, 106);
    DetectorConfig det;
    det.mode = DetectorMode::Sic;
    long long symbol_errors = 0;
    for (int t = 0; t < trials; ++t) {
        const auto inst = random_instance(rng);
        const int pulses = inst.cfg.pulses_per_user();
        std::vector<double> priors(static_cast<std::size_t>(inst.cfg.num_users) *
                                   static_cast<std::size_t>(pulses));
        for (int k = 0; k < inst.cfg.num_users; ++k) {
            for (int j = 0; j < pulses; ++j) {
                priors[static_cast<std::size_t>(k * pulses + j)] =
                    det.llr_clamp * inst.bits.pulse_bit(k, j, inst.cfg);
            }
        }
        for (int k = 0; k < inst.cfg.num_users; ++k) {
            const int paths = inst.plan.num_paths(k);
            for (int i = 0; i < inst.cfg.symbols_per_packet; ++i) {
                double sum = 0.0;
                for (int jf = 0; jf < inst.cfg.frames_per_symbol; ++jf) {
                    const int j = i * inst.cfg.frames_per_symbol + jf;
                    const auto& raw = inst.clean.raw[static_cast<std::size_t>(k)];
                    sum += pulse_llr_sic(
                        inst.descs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)],
                        std::span<const double>(
                            raw.data() + static_cast<std::size_t>(j * paths),
                            static_cast<std::size_t>(paths)),
                        priors, 0.0, det);
                }
                const int hard = sum >= 0.0 ? 1 : -1;
                symbol_errors +=
                    hard != inst.bits.bits[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            }
        }
    }
    res.worst = static_cast<double>(symbol_errors);
    res.pass = symbol_errors == 0;
    res.detail = "symbol errors: " + std::to_string(symbol_errors);
    return res;
}

inline std::vector<SuiteResult> run_all(int trials, std::uint64_t seed) {
    return {check_exact_llr(trials, seed),
            check_gaussian_lc_llr(trials, seed),
            check_prior_normalization(trials, seed),
            check_reconstruction(trials, seed),
            check_lc_reduction(trials, seed),
            check_sic_perfect_priors(trials, seed)};
}

}  // namespace thir::oracle

#endif  // THIR_ORACLE_SUITE_HPP
