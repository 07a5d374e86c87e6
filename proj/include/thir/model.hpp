#ifndef THIR_MODEL_HPP
#define THIR_MODEL_HPP

#include <vector>

#include "thir/channel.hpp"
#include "thir/codes.hpp"
#include "thir/config.hpp"
#include "thir/rng.hpp"

namespace thir {

inline void check_model_dims(const SystemConfig& cfg, const CodeBook& codes,
                             const std::vector<ChannelRealization>& channels,
                             const SymbolMatrix& bits) {
    const auto users = static_cast<std::size_t>(cfg.num_users);
    if (codes.th_codes.size() != users || codes.signs.size() != users) {
        throw ConfigError("codebook does not match num_users");
    }
    if (channels.size() != users) {
        throw ConfigError("channel list does not match num_users");
    }
    for (const auto& c : channels) {
        if (c.length() != cfg.channel_taps) {
            throw ConfigError("channel tap vector length != channel_taps");
        }
    }
    if (bits.bits.size() != users) {
        throw ConfigError("symbol matrix does not match num_users");
    }
    const auto pulses = static_cast<std::size_t>(cfg.pulses_per_user());
    for (std::size_t k = 0; k < users; ++k) {
        if (codes.th_codes[k].size() != pulses ||
            codes.signs[k].size() != pulses) {
            throw ConfigError("codebook does not match pulses per user");
        }
        if (bits.bits[k].size() !=
            static_cast<std::size_t>(cfg.symbols_per_packet)) {
            throw ConfigError("symbol matrix does not match symbols_per_packet");
        }
    }
}

// Noiseless chip-sampled received signal: every pulse of every listed user
// adds sign * (1/sqrt(N_f)) * bit * h_l at sample (pulse position + l).
// `user_mask` selects contributing users (empty = all); the vector length is
// always N*P + L - 1 regardless of the mask.
inline std::vector<double> synthesize_signal(
    const SystemConfig& cfg, const CodeBook& codes,
    const std::vector<ChannelRealization>& channels, const SymbolMatrix& bits,
    const std::vector<int>& user_mask = {}) {
    cfg.validate();
    check_model_dims(cfg, codes, channels, bits);

    std::vector<double> r(static_cast<std::size_t>(cfg.received_length()), 0.0);
    std::vector<int> users = user_mask;
    if (users.empty()) {
        users.resize(static_cast<std::size_t>(cfg.num_users));
        for (int k = 0; k < cfg.num_users; ++k) users[static_cast<std::size_t>(k)] = k;
    }

    const double amp = cfg.spreading_amplitude();
    for (int k : users) {
        const auto taps = channels[static_cast<std::size_t>(k)].scaled_taps();
        for (int j = 0; j < cfg.pulses_per_user(); ++j) {
            const int p = codes.pulse_position(k, j, cfg);
            const double w = amp * codes.signs[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *
                             bits.pulse_bit(k, j, cfg);
            for (int l = 0; l < cfg.channel_taps; ++l) {
                r[static_cast<std::size_t>(p + l)] += w * taps[static_cast<std::size_t>(l)];
            }
        }
    }
    return r;
}

inline void add_noise(std::vector<double>& r, double noise_variance,
                      SplitRng& rng) {
    if (noise_variance <= 0.0) return;
    const double sigma = std::sqrt(noise_variance);
    for (double& x : r) x += sigma * rng.next_gaussian();
}

// Full received vector r = H S b + n with n ~ N(0, noise_variance I).
inline std::vector<double> synthesize_received(
    const SystemConfig& cfg, const CodeBook& codes,
    const std::vector<ChannelRealization>& channels, const SymbolMatrix& bits,
    SplitRng& rng) {
    auto r = synthesize_signal(cfg, codes, channels, bits);
    add_noise(r, cfg.noise_variance, rng);
    return r;
}

}  // namespace thir

#endif  // THIR_MODEL_HPP
