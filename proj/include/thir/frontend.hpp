#ifndef THIR_FRONTEND_HPP
#define THIR_FRONTEND_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "thir/channel.hpp"
#include "thir/codes.hpp"
#include "thir/config.hpp"

namespace thir {

// Which multipath components the receiver samples, per user. Entries are
// 0-based tap indices, distinct within a user.
struct SamplingPlan {
    std::vector<std::vector<int>> paths;  // [user][m]

    int num_paths(int user) const {
        return static_cast<int>(paths[static_cast<std::size_t>(user)].size());
    }

    void validate(const SystemConfig& cfg) const {
        if (paths.size() != static_cast<std::size_t>(cfg.num_users)) {
            throw ConfigError("sampling plan does not match num_users");
        }
        for (const auto& set : paths) {
            if (set.empty()) throw ConfigError("empty path set");
            std::vector<int> sorted(set);
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                throw ConfigError("duplicate path index in sampling plan");
            }
            if (sorted.front() < 0 || sorted.back() >= cfg.channel_taps) {
                throw ConfigError("path index out of range");
            }
        }
    }

    // First M taps for every user.
    static SamplingPlan first_m(const SystemConfig& cfg) {
        SamplingPlan plan;
        std::vector<int> set(static_cast<std::size_t>(cfg.sampled_paths));
        for (int m = 0; m < cfg.sampled_paths; ++m) set[static_cast<std::size_t>(m)] = m;
        plan.paths.assign(static_cast<std::size_t>(cfg.num_users), set);
        return plan;
    }

    // M largest-magnitude taps per user, listed in tap order.
    static SamplingPlan strongest_m(const SystemConfig& cfg,
                                    const std::vector<ChannelRealization>& channels) {
        SamplingPlan plan;
        plan.paths.resize(static_cast<std::size_t>(cfg.num_users));
        for (int k = 0; k < cfg.num_users; ++k) {
            std::vector<int> idx(static_cast<std::size_t>(cfg.channel_taps));
            for (int l = 0; l < cfg.channel_taps; ++l) idx[static_cast<std::size_t>(l)] = l;
            const auto& taps = channels[static_cast<std::size_t>(k)].taps;
            std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
                return std::abs(taps[static_cast<std::size_t>(a)]) >
                       std::abs(taps[static_cast<std::size_t>(b)]);
            });
            idx.resize(static_cast<std::size_t>(cfg.sampled_paths));
            std::sort(idx.begin(), idx.end());
            plan.paths[static_cast<std::size_t>(k)] = std::move(idx);
        }
        return plan;
    }
};

// 0-based index into the received vector where pulse j of user k arrives via
// sampled path m: j*N_c + c_j^k + l_m^k.
inline int sample_index(int j, int k, int m, const CodeBook& codes,
                        const SamplingPlan& plan, const SystemConfig& cfg) {
    if (k < 0 || k >= cfg.num_users || j < 0 || j >= cfg.pulses_per_user() ||
        m < 0 || m >= plan.num_paths(k)) {
        throw ConfigError("sample_index arguments out of range");
    }
    return j * cfg.chips_per_frame +
           codes.th_codes[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] +
           plan.paths[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
}

// Raw per-path samples r_{j,m}^k, flattened as [user][j*M + m].
inline std::vector<std::vector<double>> extract_path_samples(
    const std::vector<double>& r, const CodeBook& codes,
    const SamplingPlan& plan, const SystemConfig& cfg) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(cfg.num_users));
    for (int k = 0; k < cfg.num_users; ++k) {
        const int paths = plan.num_paths(k);
        auto& row = out[static_cast<std::size_t>(k)];
        row.resize(static_cast<std::size_t>(cfg.pulses_per_user() * paths));
        for (int j = 0; j < cfg.pulses_per_user(); ++j) {
            for (int m = 0; m < paths; ++m) {
                row[static_cast<std::size_t>(j * paths + m)] =
                    r[static_cast<std::size_t>(sample_index(j, k, m, codes, plan, cfg))];
            }
        }
    }
    return out;
}

// Maximal-ratio combining per frame: r~_j^k = sum_m h_{l_m}^k r_{j,m}^k.
inline std::vector<std::vector<double>> mrc_combine(
    const std::vector<double>& r, const CodeBook& codes,
    const std::vector<ChannelRealization>& channels, const SamplingPlan& plan,
    const SystemConfig& cfg) {
    plan.validate(cfg);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(cfg.num_users));
    for (int k = 0; k < cfg.num_users; ++k) {
        const auto& set = plan.paths[static_cast<std::size_t>(k)];
        const auto& chan = channels[static_cast<std::size_t>(k)];
        auto& row = out[static_cast<std::size_t>(k)];
        row.resize(static_cast<std::size_t>(cfg.pulses_per_user()));
        for (int j = 0; j < cfg.pulses_per_user(); ++j) {
            double acc = 0.0;
            for (std::size_t m = 0; m < set.size(); ++m) {
                acc += chan.tap(set[m]) *
                       r[static_cast<std::size_t>(sample_index(j, k, static_cast<int>(m), codes, plan, cfg))];
            }
            row[static_cast<std::size_t>(j)] = acc;
        }
    }
    return out;
}

// Front-end output consumed by the detectors: MRC-combined frame samples and
// the raw per-path samples (needed by soft interference cancellation).
struct FrontendSamples {
    std::vector<std::vector<double>> combined;  // [user][j]
    std::vector<std::vector<double>> raw;       // [user][j*M + m]
};

inline FrontendSamples run_frontend(const std::vector<double>& r,
                                    const CodeBook& codes,
                                    const std::vector<ChannelRealization>& channels,
                                    const SamplingPlan& plan,
                                    const SystemConfig& cfg) {
    FrontendSamples out;
    out.raw = extract_path_samples(r, codes, plan, cfg);
    out.combined.resize(static_cast<std::size_t>(cfg.num_users));
    for (int k = 0; k < cfg.num_users; ++k) {
        const auto& set = plan.paths[static_cast<std::size_t>(k)];
        const auto& chan = channels[static_cast<std::size_t>(k)];
        const int paths = static_cast<int>(set.size());
        auto& row = out.combined[static_cast<std::size_t>(k)];
        row.resize(static_cast<std::size_t>(cfg.pulses_per_user()));
        for (int j = 0; j < cfg.pulses_per_user(); ++j) {
            double acc = 0.0;
            for (int m = 0; m < paths; ++m) {
                acc += chan.tap(set[static_cast<std::size_t>(m)]) *
                       out.raw[static_cast<std::size_t>(k)][static_cast<std::size_t>(j * paths + m)];
            }
            row[static_cast<std::size_t>(j)] = acc;
        }
    }
    return out;
}

struct PulseRef {
    int user = 0;
    int pulse = 0;
    bool operator==(const PulseRef&) const = default;
};

// Everything the pulse detectors need to know about one (user, pulse) pair:
// the combined-sample decomposition into a desired amplitude, the distinct
// colliding bits, and the per-path interference coefficients.
struct CollisionDescriptor {
    int user = 0;
    int pulse = 0;
    // Signed effective amplitude: sign_{j,k} * (1/sqrt(N_f)) * sum_m h_{l_m}^2.
    double amp = 0.0;
    // sum_m (h_{l_m}^k)^2; the combined noise variance is noise_gain * sigma_n^2.
    double noise_gain = 0.0;
    // MRC weights h_{l_m}^k in path order.
    std::vector<double> path_weights;
    // Distinct colliding pulses (q, a), excluding (user, pulse) itself.
    std::vector<PulseRef> interferers;
    // Flattened global bit id (user * pulses_per_user + pulse) per interferer.
    std::vector<int> bit_ids;
    // Per path m: sparse (interferer index, signed coefficient) entries. The
    // coefficient is spreading element times aligned channel tap.
    std::vector<std::vector<std::pair<int, double>>> path_rows;
    // Combined coefficient per interferer: g_i = sum_m h_{l_m} * w_{m,i}.
    std::vector<double> combined;
    // Energy aggregate per interferer: v_i = sum_m h_{l_m}^2 * w_{m,i}^2.
    std::vector<double> combined_sq;
    // 1/sqrt(N_f); lets detectors recover channel-tap magnitudes from the
    // stored coefficients.
    double spread_amp = 1.0;

    int num_interferers() const { return static_cast<int>(interferers.size()); }
};

// Enumerates, for every (user, pulse), the set of pulses with a multipath
// component landing on one of its sampled instants, and assembles the
// coefficient structure used by every detector mode. Pure; the result is
// reused across SNR points and iterations.
inline std::vector<std::vector<CollisionDescriptor>> build_collisions(
    const CodeBook& codes, const std::vector<ChannelRealization>& channels,
    const SamplingPlan& plan, const SystemConfig& cfg) {
    cfg.validate();
    plan.validate(cfg);

    struct Occupant {
        std::int32_t user;
        std::int32_t pulse;
        double coeff;
    };

    const double amp = cfg.spreading_amplitude();
    const int pulses = cfg.pulses_per_user();

    // Chip-occupancy map: which pulses reach each received sample, with the
    // corresponding signed coefficient (spreading element * channel tap).
    std::vector<std::vector<Occupant>> occupancy(
        static_cast<std::size_t>(cfg.received_length()));
    for (int q = 0; q < cfg.num_users; ++q) {
        const auto taps = channels[static_cast<std::size_t>(q)].scaled_taps();
        for (int a = 0; a < pulses; ++a) {
            const int p = codes.pulse_position(q, a, cfg);
            const double s = amp * codes.signs[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)];
            for (int l = 0; l < cfg.channel_taps; ++l) {
                if (taps[static_cast<std::size_t>(l)] == 0.0) continue;
                occupancy[static_cast<std::size_t>(p + l)].push_back(
                    {q, a, s * taps[static_cast<std::size_t>(l)]});
            }
        }
    }

    std::vector<std::vector<CollisionDescriptor>> descs(
        static_cast<std::size_t>(cfg.num_users));
    for (int k = 0; k < cfg.num_users; ++k) {
        const auto& set = plan.paths[static_cast<std::size_t>(k)];
        const auto& chan = channels[static_cast<std::size_t>(k)];
        const int num_paths = static_cast<int>(set.size());
        auto& user_descs = descs[static_cast<std::size_t>(k)];
        user_descs.resize(static_cast<std::size_t>(pulses));

        double gain = 0.0;
        std::vector<double> weights(static_cast<std::size_t>(num_paths));
        for (int m = 0; m < num_paths; ++m) {
            weights[static_cast<std::size_t>(m)] = chan.tap(set[static_cast<std::size_t>(m)]);
            gain += weights[static_cast<std::size_t>(m)] * weights[static_cast<std::size_t>(m)];
        }

        for (int j = 0; j < pulses; ++j) {
            CollisionDescriptor& d = user_descs[static_cast<std::size_t>(j)];
            d.user = k;
            d.pulse = j;
            d.path_weights = weights;
            d.noise_gain = gain;
            d.amp = codes.signs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] * amp * gain;
            d.spread_amp = amp;
            d.path_rows.assign(static_cast<std::size_t>(num_paths), {});

            for (int m = 0; m < num_paths; ++m) {
                const int t = sample_index(j, k, m, codes, plan, cfg);
                for (const Occupant& occ : occupancy[static_cast<std::size_t>(t)]) {
                    if (occ.user == k && occ.pulse == j) continue;
                    // Linear search: distinct collider lists stay small.
                    int idx = -1;
                    for (std::size_t i = 0; i < d.interferers.size(); ++i) {
                        if (d.interferers[i].user == occ.user &&
                            d.interferers[i].pulse == occ.pulse) {
                            idx = static_cast<int>(i);
                            break;
                        }
                    }
                    if (idx < 0) {
                        idx = static_cast<int>(d.interferers.size());
                        d.interferers.push_back({occ.user, occ.pulse});
                        d.bit_ids.push_back(occ.user * pulses + occ.pulse);
                        d.combined.push_back(0.0);
                        d.combined_sq.push_back(0.0);
                    }
                    d.path_rows[static_cast<std::size_t>(m)].emplace_back(idx, occ.coeff);
                    const double w = weights[static_cast<std::size_t>(m)];
                    d.combined[static_cast<std::size_t>(idx)] += w * occ.coeff;
                    d.combined_sq[static_cast<std::size_t>(idx)] += w * w * occ.coeff * occ.coeff;
                }
            }
        }
    }
    return descs;
}

}  // namespace thir

#endif  // THIR_FRONTEND_HPP
