#ifndef THIR_EXPERIMENT_IO_HPP
#define THIR_EXPERIMENT_IO_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thir/harness.hpp"

namespace thir {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean for " + key + ": " + v);
}

inline double parse_num(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + key + ": " + v);
    }
}

inline int parse_int(const std::string& v, const std::string& key) {
    const double d = parse_num(v, key);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) {
        throw ConfigError("expected integer for " + key + ": " + v);
    }
    return i;
}

}  // namespace detail

// Flat key = value experiment configuration. '#' starts a comment; unknown
// keys are rejected. The key list mirrors the ExperimentSpec fields and is
// documented in the README.
inline ExperimentSpec parse_experiment_config(std::istream& in,
                                              ExperimentSpec spec = ExperimentSpec::desk_default()) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (value.empty()) {
            throw ConfigError("config key has empty value: " + key);
        }

        if (key == "num_users") {
            spec.sys.num_users = detail::parse_int(value, key);
        } else if (key == "symbols_per_packet") {
            spec.sys.symbols_per_packet = detail::parse_int(value, key);
        } else if (key == "frames_per_symbol") {
            spec.sys.frames_per_symbol = detail::parse_int(value, key);
        } else if (key == "chips_per_frame") {
            spec.sys.chips_per_frame = detail::parse_int(value, key);
        } else if (key == "channel_taps") {
            spec.sys.channel_taps = detail::parse_int(value, key);
        } else if (key == "sampled_paths") {
            spec.sys.sampled_paths = detail::parse_int(value, key);
        } else if (key == "iterations") {
            spec.sys.iterations = detail::parse_int(value, key);
        } else if (key == "seed") {
            spec.sys.rng_seed = static_cast<std::uint64_t>(
                std::stoull(value));
        } else if (key == "no_ifi") {
            spec.sys.no_ifi = detail::parse_bool(value, key);
        } else if (key == "channel") {
            if (value == "cm1-like") {
                spec.channel_kind = ChannelKind::Cm1Like;
            } else if (value == "cm3-like") {
                spec.channel_kind = ChannelKind::Cm3Like;
            } else if (value == "flat") {
                spec.channel_kind = ChannelKind::Flat;
            } else if (value.rfind("cir:", 0) == 0) {
                spec.channel_kind = ChannelKind::CirFiles;
                spec.cir_paths = detail::split(value.substr(4), ';');
            } else {
                throw ConfigError("unknown channel: " + value);
            }
        } else if (key == "chip_period_ns") {
            spec.chip_period_ns = detail::parse_num(value, key);
        } else if (key == "shadowing_std_db") {
            spec.shadowing_std_db = detail::parse_num(value, key);
        } else if (key == "strongest_paths") {
            spec.strongest_paths = detail::parse_bool(value, key);
        } else if (key == "snr_db") {
            spec.snr_grid_db.clear();
            for (const auto& item : detail::split(value, ',')) {
                spec.snr_grid_db.push_back(detail::parse_num(item, key));
            }
        } else if (key == "receivers") {
            spec.receivers.clear();
            for (const auto& item : detail::split(value, ',')) {
                spec.receivers.push_back(parse_receiver(item));
            }
        } else if (key == "interferer_power_db") {
            spec.interferer_power_db = detail::parse_num(value, key);
        } else if (key == "realizations") {
            spec.realizations = detail::parse_int(value, key);
        } else if (key == "symbols_per_realization") {
            spec.symbols_per_realization =
                static_cast<long long>(detail::parse_num(value, key));
        } else if (key == "detector_threshold_db") {
            spec.det.threshold_db = detail::parse_num(value, key);
        } else if (key == "top_delta") {
            spec.det.top_delta = detail::parse_int(value, key);
        } else if (key == "max_exact_bits") {
            spec.det.max_exact_bits = detail::parse_int(value, key);
        } else if (key == "llr_clamp") {
            spec.det.llr_clamp = detail::parse_num(value, key);
        } else if (key == "complexity_thresholds_db") {
            spec.complexity_thresholds_db.clear();
            for (const auto& item : detail::split(value, ',')) {
                spec.complexity_thresholds_db.push_back(
                    detail::parse_num(item, key));
            }
        } else if (key == "count_mults") {
            spec.count_mults = detail::parse_bool(value, key);
        } else if (key == "threads") {
            spec.threads = detail::parse_int(value, key);
        } else if (key == "out") {
            spec.out_path = value;
        } else if (key == "format") {
            spec.format = value;
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    return spec;
}

inline ExperimentSpec load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse_experiment_config(in);
}

// --------------------------- JSON emission -------------------------------

inline void write_ber_json(const BerTable& table, std::ostream& out) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"receiver", r.receiver},
                        {"iteration", r.iteration},
                        {"snr_db", r.snr_db},
                        {"symbols", r.symbols},
                        {"errors", r.errors},
                        {"ber", r.ber},
                        {"stderr", r.stderr_value},
                        {"realizations", r.realizations}});
    }
    out << rows.dump(2) << '\n';
}

inline void write_complexity_json(const ComplexityTable& table,
                                  std::ostream& out) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"realization", r.realization},
                        {"n_f", r.n_f},
                        {"threshold_db", r.threshold_db},
                        {"y", r.y},
                        {"y_tilde", r.y_tilde}});
    }
    out << rows.dump(2) << '\n';
}

inline void write_mults_json(const BerTable& table, std::ostream& out) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& m : table.mults) {
        rows.push_back(
            {{"realization", m.realization},
             {"receiver", m.receiver},
             {"mults_per_user_per_iteration", m.mults_per_user_per_iteration}});
    }
    out << rows.dump(2) << '\n';
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    return out;
}

inline std::string sibling_path(const std::string& path,
                                const std::string& suffix) {
    const auto dot = path.find_last_of('.');
    const auto slash = path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return path + suffix;
    }
    return path.substr(0, dot) + suffix + path.substr(dot);
}

}  // namespace detail

// Writes a BER table (and, when instrumentation ran, a *_mults sibling file)
// in the requested format.
inline void emit_results(const BerTable& table, const std::string& format,
                         const std::string& path) {
    if (table.rows.empty()) throw ConfigError("emit_results: empty BER table");
    auto out = detail::open_out(path);
    if (format == "json") {
        write_ber_json(table, out);
    } else {
        write_ber_csv(table, out);
    }
    if (!table.mults.empty()) {
        auto mout = detail::open_out(detail::sibling_path(path, "_mults"));
        if (format == "json") {
            write_mults_json(table, mout);
        } else {
            write_mults_csv(table, mout);
        }
    }
}

inline void emit_results(const ComplexityTable& table, const std::string& format,
                         const std::string& path) {
    if (table.rows.empty()) {
        throw ConfigError("emit_results: empty complexity table");
    }
    auto out = detail::open_out(path);
    if (format == "json") {
        write_complexity_json(table, out);
    } else {
        write_complexity_csv(table, out);
    }
}

}  // namespace thir

#endif  // THIR_EXPERIMENT_IO_HPP
