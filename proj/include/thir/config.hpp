#ifndef THIR_CONFIG_HPP
#define THIR_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace thir {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when the exact pulse detector is asked to enumerate more distinct
// colliding bits than max_exact_bits allows.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a zero-noise likelihood is requested while interference is
// still being marginalized.
class DegenerateNoiseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scalar system parameters of the chip-sampled TH-IR model.
//
// Indexing convention used throughout the library: chips, samples, pulses,
// frames, users and taps are all 0-based. A pulse j of user k sits at chip
// p = j*chips_per_frame + code(k, j) and reaches the received vector at
// samples p + l for taps l = 0 .. channel_taps-1. The received vector has
// exactly frames*chips*symbols + channel_taps - 1 entries.
struct SystemConfig {
    int num_users = 1;          // K
    int symbols_per_packet = 1; // P
    int frames_per_symbol = 1;  // N_f
    int chips_per_frame = 1;    // N_c
    int channel_taps = 1;       // L
    int sampled_paths = 1;      // M (<= L)
    double noise_variance = 0.0;  // per chip sample
    int iterations = 3;           // N_i
    std::uint64_t rng_seed = 1;
    bool no_ifi = false;

    int processing_gain() const { return frames_per_symbol * chips_per_frame; }
    int pulses_per_user() const { return frames_per_symbol * symbols_per_packet; }
    int received_length() const {
        return processing_gain() * symbols_per_packet + channel_taps - 1;
    }
    // TH codes are drawn from [0, code_range).
    int code_range() const {
        return no_ifi ? chips_per_frame - channel_taps : chips_per_frame;
    }
    double spreading_amplitude() const {
        return 1.0 / std::sqrt(static_cast<double>(frames_per_symbol));
    }

    void validate() const {
        if (num_users < 1 || symbols_per_packet < 1 || frames_per_symbol < 1 ||
            chips_per_frame < 1 || channel_taps < 1 || sampled_paths < 1) {
            throw ConfigError("all system counts must be >= 1");
        }
        if (sampled_paths > channel_taps) {
            throw ConfigError("sampled_paths must not exceed channel_taps");
        }
        if (noise_variance < 0.0) {
            throw ConfigError("noise_variance must be nonnegative");
        }
        if (iterations < 1) {
            throw ConfigError("iterations must be >= 1");
        }
        if (no_ifi && chips_per_frame <= channel_taps) {
            throw ConfigError(
                "no_ifi requires chips_per_frame > channel_taps");
        }
    }
};

enum class DetectorMode { Exact, GaussianLc, Sic };

struct DetectorConfig {
    DetectorMode mode = DetectorMode::Exact;
    // Gaussian-LC strong/weak threshold in dB; +inf reproduces the exact
    // detector, -inf approximates all interference as Gaussian noise.
    double threshold_db = 10.0;
    // When set, replaces the threshold rule: only the top_delta strongest
    // colliding pulses are enumerated.
    std::optional<int> top_delta;
    int max_exact_bits = 16;
    double llr_clamp = 50.0;
    bool store_trace = false;

    void validate() const {
        if (llr_clamp <= 0.0) throw ConfigError("llr_clamp must be positive");
        if (max_exact_bits < 0) throw ConfigError("max_exact_bits must be >= 0");
        if (top_delta && *top_delta < 0) {
            throw ConfigError("top_delta must be >= 0");
        }
    }
};

}  // namespace thir

#endif  // THIR_CONFIG_HPP
