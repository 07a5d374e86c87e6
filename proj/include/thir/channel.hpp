#ifndef THIR_CHANNEL_HPP
#define THIR_CHANNEL_HPP

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thir/config.hpp"
#include "thir/rng.hpp"

namespace thir {

// Discrete-time channel impulse response of one user. `taps` is unit-energy;
// `power_scale` is a linear amplitude multiplier that absorbs the transmitted
// energy per bit (interferer power offsets are applied here).
// `captured_energy` is the fraction of the pre-normalization energy that fell
// inside the tap window (1.0 when nothing was truncated).
struct ChannelRealization {
    std::vector<double> taps;
    double power_scale = 1.0;
    double captured_energy = 1.0;

    double tap(int l) const { return taps[static_cast<std::size_t>(l)] * power_scale; }
    int length() const { return static_cast<int>(taps.size()); }

    std::vector<double> scaled_taps() const {
        std::vector<double> out(taps);
        for (double& t : out) t *= power_scale;
        return out;
    }

    static ChannelRealization from_taps(std::vector<double> raw,
                                        bool normalize = true) {
        if (raw.empty()) throw ConfigError("channel needs at least one tap");
        ChannelRealization c;
        c.taps = std::move(raw);
        if (normalize) c.normalize();
        return c;
    }

    void normalize() {
        double energy = 0.0;
        for (double t : taps) energy += t * t;
        if (energy <= 0.0) {
            throw ConfigError("cannot normalize an all-zero channel");
        }
        const double inv = 1.0 / std::sqrt(energy);
        for (double& t : taps) t *= inv;
    }

    // Truncate or zero-pad to exactly L taps, tracking the energy kept.
    ChannelRealization fitted(int num_taps, bool normalize = true) const {
        ChannelRealization out;
        out.power_scale = power_scale;
        out.taps.assign(static_cast<std::size_t>(num_taps), 0.0);
        double total = 0.0;
        double kept = 0.0;
        for (std::size_t l = 0; l < taps.size(); ++l) {
            total += taps[l] * taps[l];
            if (l < out.taps.size()) {
                out.taps[l] = taps[l];
                kept += taps[l] * taps[l];
            }
        }
        out.captured_energy = total > 0.0 ? kept / total : 0.0;
        if (normalize) out.normalize();
        return out;
    }
};

// Parameters of the chip-binned cluster-ray generator. Rates are per ns,
// decay constants in ns. This is a simplified Saleh-Valenzuela-style model;
// load_cir() exists so externally generated CIRs can be used instead.
struct ClusterRayParams {
    double cluster_rate = 0.0233;  // Lambda, 1/ns
    double ray_rate = 2.5;         // lambda, 1/ns
    double cluster_decay = 7.1;    // Gamma, ns
    double ray_decay = 4.3;        // gamma, ns
    double shadowing_std_db = 0.0; // 0 disables lognormal shadowing
    double chip_period = 2.0;      // T_c, ns (0.5 GHz bandwidth)
    int num_taps = 25;             // L

    void validate() const {
        if (cluster_rate <= 0.0 || ray_rate <= 0.0 || cluster_decay <= 0.0 ||
            ray_decay <= 0.0 || chip_period <= 0.0) {
            throw ConfigError("cluster/ray rates and decays must be positive");
        }
        if (num_taps < 1) throw ConfigError("num_taps must be >= 1");
    }

    static ClusterRayParams cm1_like(int num_taps = 25, double chip_period = 2.0) {
        ClusterRayParams p;
        p.cluster_rate = 0.0233;
        p.ray_rate = 2.5;
        p.cluster_decay = 7.1;
        p.ray_decay = 4.3;
        p.num_taps = num_taps;
        p.chip_period = chip_period;
        return p;
    }

    static ClusterRayParams cm3_like(int num_taps = 25, double chip_period = 2.0) {
        ClusterRayParams p;
        p.cluster_rate = 0.0667;
        p.ray_rate = 2.1;
        p.cluster_decay = 14.0;
        p.ray_decay = 7.9;
        p.num_taps = num_taps;
        p.chip_period = chip_period;
        return p;
    }
};

// Draws one channel realization: Poisson cluster arrivals (first cluster at
// t = 0), Poisson ray arrivals inside each cluster (first ray at the cluster
// start), double-exponential power decay, equiprobable ray sign, coherent
// binning into chip-spaced taps, truncation to L taps, unit-energy
// normalization. Rays beyond the tap window are generated (up to a decay
// horizon) only to account for the truncated energy.
inline ChannelRealization generate_cir(const ClusterRayParams& params,
                                       SplitRng& rng) {
    params.validate();
    const double horizon = params.num_taps * params.chip_period;
    const double gen_horizon =
        horizon + 15.0 * std::max(params.cluster_decay, params.ray_decay);
    const int gen_bins =
        static_cast<int>(std::ceil(gen_horizon / params.chip_period)) + 1;

    // Bin over the full generation horizon; the extra taps only feed the
    // truncation-energy metadata.
    std::vector<double> bins(static_cast<std::size_t>(gen_bins), 0.0);

    double cluster_t = 0.0;
    while (cluster_t < gen_horizon) {
        const double cluster_gain = std::exp(-cluster_t / params.cluster_decay);
        double ray_t = 0.0;
        while (cluster_t + ray_t < gen_horizon) {
            const double power =
                cluster_gain * std::exp(-ray_t / params.ray_decay);
            const double amp = rng.next_sign() * std::sqrt(power);
            const double arrival = cluster_t + ray_t;
            const int bin = static_cast<int>(arrival / params.chip_period);
            if (bin < gen_bins) bins[static_cast<std::size_t>(bin)] += amp;
            ray_t += rng.next_exponential(params.ray_rate);
        }
        cluster_t += rng.next_exponential(params.cluster_rate);
    }

    if (params.shadowing_std_db > 0.0) {
        const double sh =
            std::pow(10.0, params.shadowing_std_db * rng.next_gaussian() / 20.0);
        for (double& b : bins) b *= sh;
    }

    double total_energy = 0.0;
    double kept_energy = 0.0;
    for (int l = 0; l < gen_bins; ++l) {
        const double e = bins[static_cast<std::size_t>(l)] * bins[static_cast<std::size_t>(l)];
        total_energy += e;
        if (l < params.num_taps) kept_energy += e;
    }

    ChannelRealization out;
    out.taps.assign(bins.begin(), bins.begin() + params.num_taps);
    out.captured_energy = total_energy > 0.0 ? kept_energy / total_energy : 0.0;
    out.normalize();
    return out;
}

// Reads the plain-text CIR format: one real tap amplitude per line, '#'
// starting a comment line, blank lines ignored, decimal or scientific
// notation. Renormalizes to unit energy unless normalize is false.
inline ChannelRealization load_cir(const std::string& path,
                                   bool normalize = true) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CIR file: " + path);
    std::vector<double> taps;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        std::istringstream ss(line.substr(first));
        double v = 0.0;
        if (!(ss >> v)) {
            throw IoError("parse failure in " + path + " at line " +
                          std::to_string(lineno));
        }
        std::string rest;
        if (ss >> rest && rest[0] != '#') {
            throw IoError("trailing junk in " + path + " at line " +
                          std::to_string(lineno));
        }
        if (!std::isfinite(v)) {
            throw IoError("non-finite tap in " + path + " at line " +
                          std::to_string(lineno));
        }
        taps.push_back(v);
    }
    if (taps.empty()) throw IoError("CIR file has no taps: " + path);
    return ChannelRealization::from_taps(std::move(taps), normalize);
}

}  // namespace thir

#endif  // THIR_CHANNEL_HPP
