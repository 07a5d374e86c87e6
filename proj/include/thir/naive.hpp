#ifndef THIR_NAIVE_HPP
#define THIR_NAIVE_HPP

// Reference implementations used as independent oracles by the test suites
// and the `oracle-check` CLI command. Everything here is a literal
// transcription of the model definitions (dense matrices, plain-double
// exponential sums, brute-force collision scans); none of it shares code
// with the optimized paths it is meant to check.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "thir/channel.hpp"
#include "thir/codes.hpp"
#include "thir/config.hpp"
#include "thir/frontend.hpp"

namespace thir::naive {

// r = H S b built from explicitly materialized dense matrices, exactly as
// the block definitions state: H = [H_1 ... H_K], S = blockdiag(S_k),
// b = [b_1; ...; b_K].
inline std::vector<double> dense_received(
    const SystemConfig& cfg, const CodeBook& codes,
    const std::vector<ChannelRealization>& channels, const SymbolMatrix& bits) {
    const int n = cfg.processing_gain();
    const int np = n * cfg.symbols_per_packet;
    const int rows = np + cfg.channel_taps - 1;
    const int k_users = cfg.num_users;

    // H: rows x (K * NP). Column (k, c) carries h_k at rows c .. c+L-1.
    std::vector<std::vector<double>> h_mat(
        static_cast<std::size_t>(rows),
        std::vector<double>(static_cast<std::size_t>(k_users * np), 0.0));
    for (int k = 0; k < k_users; ++k) {
        const auto taps = channels[static_cast<std::size_t>(k)].scaled_taps();
        for (int c = 0; c < np; ++c) {
            for (int l = 0; l < cfg.channel_taps; ++l) {
                h_mat[static_cast<std::size_t>(c + l)][static_cast<std::size_t>(k * np + c)] =
                    taps[static_cast<std::size_t>(l)];
            }
        }
    }

    // S: (K * NP) x (K * P), block diagonal. Nonzero elements of user k's
    // flattened spreading sequence sit at chip j*N_c + c_j^k with value
    // sign / sqrt(N_f), in the column of the symbol the pulse belongs to.
    std::vector<std::vector<double>> s_mat(
        static_cast<std::size_t>(k_users * np),
        std::vector<double>(static_cast<std::size_t>(k_users * cfg.symbols_per_packet), 0.0));
    for (int k = 0; k < k_users; ++k) {
        for (int j = 0; j < cfg.pulses_per_user(); ++j) {
            const int chip = j * cfg.chips_per_frame +
                             codes.th_codes[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            const int symbol = j / cfg.frames_per_symbol;
            s_mat[static_cast<std::size_t>(k * np + chip)]
                 [static_cast<std::size_t>(k * cfg.symbols_per_packet + symbol)] =
                codes.signs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *
                cfg.spreading_amplitude();
        }
    }

    std::vector<double> b(static_cast<std::size_t>(k_users * cfg.symbols_per_packet));
    for (int k = 0; k < k_users; ++k) {
        for (int i = 0; i < cfg.symbols_per_packet; ++i) {
            b[static_cast<std::size_t>(k * cfg.symbols_per_packet + i)] =
                bits.bits[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        }
    }

    // x = S b, then r = H x; plain triple loops.
    std::vector<double> x(static_cast<std::size_t>(k_users * np), 0.0);
    for (std::size_t r = 0; r < x.size(); ++r) {
        for (std::size_t c = 0; c < b.size(); ++c) x[r] += s_mat[r][c] * b[c];
    }
    std::vector<double> out(static_cast<std::size_t>(rows), 0.0);
    for (std::size_t r = 0; r < out.size(); ++r) {
        for (std::size_t c = 0; c < x.size(); ++c) out[r] += h_mat[r][c] * x[c];
    }
    return out;
}

// One per-path collision entry found by brute-force scanning.
struct CollisionEntry {
    int path = 0;   // m
    int user = 0;   // q
    int pulse = 0;  // a
    double coeff = 0.0;
    double tap = 0.0;  // aligned channel tap of the interferer (scaled)
};

// Brute-force scan over every pulse of every user for each sampled instant
// of (k, j); no occupancy map involved.
inline std::vector<CollisionEntry> scan_collisions(
    const SystemConfig& cfg, const CodeBook& codes,
    const std::vector<ChannelRealization>& channels, const SamplingPlan& plan,
    int k, int j) {
    std::vector<CollisionEntry> entries;
    const int paths = plan.num_paths(k);
    for (int m = 0; m < paths; ++m) {
        const int t = j * cfg.chips_per_frame +
                      codes.th_codes[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] +
                      plan.paths[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
        for (int q = 0; q < cfg.num_users; ++q) {
            for (int a = 0; a < cfg.pulses_per_user(); ++a) {
                if (q == k && a == j) continue;
                const int off = t - (a * cfg.chips_per_frame +
                                     codes.th_codes[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)]);
                if (off < 0 || off >= cfg.channel_taps) continue;
                const double tap = channels[static_cast<std::size_t>(q)].tap(off);
                if (tap == 0.0) continue;
                entries.push_back(
                    {m, q, a,
                     codes.signs[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)] *
                         cfg.spreading_amplitude() * tap,
                     tap});
            }
        }
    }
    return entries;
}

namespace detail {

struct DistinctBits {
    std::vector<int> users;
    std::vector<int> pulses;

    int find_or_add(int q, int a) {
        for (std::size_t i = 0; i < users.size(); ++i) {
            if (users[i] == q && pulses[i] == a) return static_cast<int>(i);
        }
        users.push_back(q);
        pulses.push_back(a);
        return static_cast<int>(users.size()) - 1;
    }
};

}  // namespace detail

// Plain-double transcription of the exact pulse LLR: enumerate every
// assignment of the distinct colliding bits, accumulate per-path
// h_{l_m} * (h~_{j,m} . b~_{j,m}) sums literally, weight by the prior
// product, and take the ratio of likelihood sums.
inline double pulse_llr_exact(const SystemConfig& cfg, const CodeBook& codes,
                              const std::vector<ChannelRealization>& channels,
                              const SamplingPlan& plan, int k, int j,
                              double r_tilde,
                              const std::vector<double>& lambda2,
                              double sigma_n2) {
    const auto entries = scan_collisions(cfg, codes, channels, plan, k, j);
    detail::DistinctBits distinct;
    std::vector<int> entry_bit(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) {
        entry_bit[e] = distinct.find_or_add(entries[e].user, entries[e].pulse);
    }
    const int n = static_cast<int>(distinct.users.size());

    const int paths = plan.num_paths(k);
    double gain = 0.0;
    std::vector<double> weights(static_cast<std::size_t>(paths));
    for (int m = 0; m < paths; ++m) {
        weights[static_cast<std::size_t>(m)] = channels[static_cast<std::size_t>(k)].tap(
            plan.paths[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)]);
        gain += weights[static_cast<std::size_t>(m)] * weights[static_cast<std::size_t>(m)];
    }
    const double amp =
        codes.signs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *
        cfg.spreading_amplitude() * gain;
    const double sigma2 = sigma_n2 * gain;

    double num = 0.0;
    double den = 0.0;
    for (long mask = 0; mask < (1L << n); ++mask) {
        std::vector<int> b(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? 1 : -1;

        double prior = 1.0;
        for (int i = 0; i < n; ++i) {
            const int id = distinct.users[static_cast<std::size_t>(i)] * cfg.pulses_per_user() +
                           distinct.pulses[static_cast<std::size_t>(i)];
            prior *= 0.5 * (1.0 + b[static_cast<std::size_t>(i)] *
                                      std::tanh(0.5 * lambda2[static_cast<std::size_t>(id)]));
        }

        // s = sum_m h_{l_m} * (h~_{j,m} . b~_{j,m})
        double s = 0.0;
        for (int m = 0; m < paths; ++m) {
            double dot = 0.0;
            for (std::size_t e = 0; e < entries.size(); ++e) {
                if (entries[e].path != m) continue;
                dot += entries[e].coeff * b[static_cast<std::size_t>(entry_bit[e])];
            }
            s += weights[static_cast<std::size_t>(m)] * dot;
        }

        const double dn = r_tilde - amp - s;
        const double dd = r_tilde + amp - s;
        num += std::exp(-dn * dn / (2.0 * sigma2)) * prior;
        den += std::exp(-dd * dd / (2.0 * sigma2)) * prior;
    }
    return std::log(num / den);
}

// Plain-double transcription of the Gaussian-approximation LLR with the
// decibel threshold applied literally: entry (m, i) is strong when
// 10 log10|h_{l_m}| - 10 log10|h_i| <= T.
inline double pulse_llr_gaussian_lc(
    const SystemConfig& cfg, const CodeBook& codes,
    const std::vector<ChannelRealization>& channels, const SamplingPlan& plan,
    int k, int j, double r_tilde, const std::vector<double>& lambda2,
    double sigma_n2, double threshold_db) {
    const auto entries = scan_collisions(cfg, codes, channels, plan, k, j);
    const int paths = plan.num_paths(k);

    std::vector<double> weights(static_cast<std::size_t>(paths));
    double gain = 0.0;
    for (int m = 0; m < paths; ++m) {
        weights[static_cast<std::size_t>(m)] = channels[static_cast<std::size_t>(k)].tap(
            plan.paths[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)]);
        gain += weights[static_cast<std::size_t>(m)] * weights[static_cast<std::size_t>(m)];
    }
    const double amp =
        codes.signs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *
        cfg.spreading_amplitude() * gain;

    detail::DistinctBits strong;
    std::vector<int> strong_bit(entries.size(), -1);
    std::vector<char> is_strong(entries.size(), 0);
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const double lhs =
            10.0 * std::log10(std::abs(weights[static_cast<std::size_t>(entries[e].path)])) -
            10.0 * std::log10(std::abs(entries[e].tap));
        if (lhs <= threshold_db) {
            is_strong[e] = 1;
            strong_bit[e] = strong.find_or_add(entries[e].user, entries[e].pulse);
        }
    }
    const int n = static_cast<int>(strong.users.size());

    // Combined variance: sum_m h_m^2 (sigma_n^2 + sum_weak coeff^2).
    double sigma2 = 0.0;
    for (int m = 0; m < paths; ++m) {
        double path_var = sigma_n2;
        for (std::size_t e = 0; e < entries.size(); ++e) {
            if (entries[e].path == m && !is_strong[e]) {
                path_var += entries[e].coeff * entries[e].coeff;
            }
        }
        sigma2 += weights[static_cast<std::size_t>(m)] * weights[static_cast<std::size_t>(m)] * path_var;
    }

    double num = 0.0;
    double den = 0.0;
    for (long mask = 0; mask < (1L << n); ++mask) {
        std::vector<int> b(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? 1 : -1;

        double prior = 1.0;
        for (int i = 0; i < n; ++i) {
            const int id = strong.users[static_cast<std::size_t>(i)] * cfg.pulses_per_user() +
                           strong.pulses[static_cast<std::size_t>(i)];
            prior *= 0.5 * (1.0 + b[static_cast<std::size_t>(i)] *
                                      std::tanh(0.5 * lambda2[static_cast<std::size_t>(id)]));
        }

        double s = 0.0;
        for (int m = 0; m < paths; ++m) {
            double dot = 0.0;
            for (std::size_t e = 0; e < entries.size(); ++e) {
                if (entries[e].path != m || !is_strong[e]) continue;
                dot += entries[e].coeff * b[static_cast<std::size_t>(strong_bit[e])];
            }
            s += weights[static_cast<std::size_t>(m)] * dot;
        }

        const double dn = r_tilde - amp - s;
        const double dd = r_tilde + amp - s;
        num += std::exp(-dn * dn / (2.0 * sigma2)) * prior;
        den += std::exp(-dd * dd / (2.0 * sigma2)) * prior;
    }
    return std::log(num / den);
}

// Exhaustive joint MAP over all users' symbol vectors under the
// combined-sample model: each r~_j^k is treated as Gaussian around the
// noiseless combined sample implied by the candidate bits (rebuilt through
// the dense synthesis oracle), with variance sigma_n^2 sum_m h_m^2.
inline std::vector<std::vector<std::int8_t>> map_decide(
    const SystemConfig& cfg, const CodeBook& codes,
    const std::vector<ChannelRealization>& channels, const SamplingPlan& plan,
    const std::vector<std::vector<double>>& observed_combined,
    double sigma_n2) {
    const int total_bits = cfg.num_users * cfg.symbols_per_packet;
    if (total_bits > 20) throw ConfigError("map_decide: instance too large");

    std::vector<double> gains(static_cast<std::size_t>(cfg.num_users), 0.0);
    for (int k = 0; k < cfg.num_users; ++k) {
        for (int m = 0; m < plan.num_paths(k); ++m) {
            const double h = channels[static_cast<std::size_t>(k)].tap(
                plan.paths[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)]);
            gains[static_cast<std::size_t>(k)] += h * h;
        }
    }

    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<std::int8_t>> best_bits;
    for (long mask = 0; mask < (1L << total_bits); ++mask) {
        SymbolMatrix cand;
        cand.bits.assign(static_cast<std::size_t>(cfg.num_users),
                         std::vector<std::int8_t>(static_cast<std::size_t>(cfg.symbols_per_packet), 1));
        for (int k = 0; k < cfg.num_users; ++k) {
            for (int i = 0; i < cfg.symbols_per_packet; ++i) {
                cand.bits[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
                    (mask >> (k * cfg.symbols_per_packet + i)) & 1 ? 1 : -1;
            }
        }
        const auto clean = dense_received(cfg, codes, channels, cand);

        double score = 0.0;
        for (int k = 0; k < cfg.num_users; ++k) {
            const double sigma2 = sigma_n2 * gains[static_cast<std::size_t>(k)];
            for (int j = 0; j < cfg.pulses_per_user(); ++j) {
                double mean = 0.0;
                for (int m = 0; m < plan.num_paths(k); ++m) {
                    const int l = plan.paths[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
                    const int t = j * cfg.chips_per_frame +
                                  codes.th_codes[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] + l;
                    mean += channels[static_cast<std::size_t>(k)].tap(l) *
                            clean[static_cast<std::size_t>(t)];
                }
                const double d =
                    observed_combined[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] - mean;
                score -= d * d / (2.0 * sigma2);
            }
        }
        if (score > best) {
            best = score;
            best_bits = cand.bits;
        }
    }
    return best_bits;
}

}  // namespace thir::naive

#endif  // THIR_NAIVE_HPP
