#ifndef THIR_HARNESS_HPP
#define THIR_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "thir/channel.hpp"
#include "thir/codes.hpp"
#include "thir/config.hpp"
#include "thir/detectors.hpp"
#include "thir/frontend.hpp"
#include "thir/math.hpp"
#include "thir/model.hpp"
#include "thir/rng.hpp"

namespace thir {

enum class Receiver { MrcRake, Exact, GaussianLc, Sic, SingleUserBound };

inline const char* receiver_name(Receiver r) {
    switch (r) {
        case Receiver::MrcRake: return "mrc_rake";
        case Receiver::Exact: return "exact";
        case Receiver::GaussianLc: return "gaussian_lc";
        case Receiver::Sic: return "sic";
        case Receiver::SingleUserBound: return "single_user_bound";
    }
    return "?";
}

inline Receiver parse_receiver(const std::string& s) {
    if (s == "mrc_rake") return Receiver::MrcRake;
    if (s == "exact") return Receiver::Exact;
    if (s == "gaussian_lc") return Receiver::GaussianLc;
    if (s == "sic") return Receiver::Sic;
    if (s == "single_user_bound") return Receiver::SingleUserBound;
    throw ConfigError("unknown receiver: " + s);
}

enum class ChannelKind { Cm1Like, Cm3Like, Flat, CirFiles };

// Full description of one experiment. Field names double as the config-file
// key list (see parse_experiment_config).
struct ExperimentSpec {
    SystemConfig sys;
    DetectorConfig det;

    ChannelKind channel_kind = ChannelKind::Cm1Like;
    std::vector<std::string> cir_paths;
    double chip_period_ns = 2.0;
    double shadowing_std_db = 0.0;
    bool strongest_paths = false;

    std::vector<double> snr_grid_db;
    std::vector<Receiver> receivers;
    double interferer_power_db = 10.0;
    int realizations = 20;
    long long symbols_per_realization = 20000;

    std::vector<double> complexity_thresholds_db = {3.0};
    bool count_mults = false;

    int threads = 1;
    std::string out_path;
    std::string format = "csv";

    void validate() const {
        sys.validate();
        det.validate();
        if (receivers.empty()) throw ConfigError("receiver list is empty");
        if (snr_grid_db.empty()) throw ConfigError("snr grid is empty");
        if (realizations < 1) throw ConfigError("realizations must be >= 1");
        if (symbols_per_realization < 1) {
            throw ConfigError("symbols_per_realization must be >= 1");
        }
        if (threads < 1) throw ConfigError("threads must be >= 1");
        if (format != "csv" && format != "json") {
            throw ConfigError("format must be csv or json");
        }
        if (channel_kind == ChannelKind::CirFiles && cir_paths.empty()) {
            throw ConfigError("cir channel requested without file paths");
        }
    }

    // Desk-scale defaults.
    static ExperimentSpec desk_default() {
        ExperimentSpec s;
        s.sys.num_users = 5;
        s.sys.symbols_per_packet = 100;
        s.sys.frames_per_symbol = 5;
        s.sys.chips_per_frame = 50;
        s.sys.channel_taps = 25;
        s.sys.sampled_paths = 25;
        s.sys.iterations = 3;
        s.sys.no_ifi = true;
        s.sys.rng_seed = 1;
        s.snr_grid_db = {0, 2, 4, 6, 8, 10, 12, 14};
        s.receivers = {Receiver::MrcRake, Receiver::GaussianLc, Receiver::Sic,
                       Receiver::SingleUserBound};
        return s;
    }
};

namespace detail {

enum StreamId : std::uint64_t {
    kStreamChannel = 1,
    kStreamCodes = 2,
    kStreamBits = 3,
    kStreamNoise = 4,
};

inline std::vector<ChannelRealization> draw_channels(const ExperimentSpec& spec,
                                                     int realization) {
    std::vector<ChannelRealization> channels;
    channels.reserve(static_cast<std::size_t>(spec.sys.num_users));
    for (int k = 0; k < spec.sys.num_users; ++k) {
        SplitRng rng(spec.sys.rng_seed, static_cast<std::uint64_t>(realization),
                     kStreamChannel, static_cast<std::uint64_t>(k));
        ChannelRealization chan;
        switch (spec.channel_kind) {
            case ChannelKind::Cm1Like:
            case ChannelKind::Cm3Like: {
                ClusterRayParams p =
                    spec.channel_kind == ChannelKind::Cm1Like
                        ? ClusterRayParams::cm1_like(spec.sys.channel_taps,
                                                     spec.chip_period_ns)
                        : ClusterRayParams::cm3_like(spec.sys.channel_taps,
                                                     spec.chip_period_ns);
                p.shadowing_std_db = spec.shadowing_std_db;
                chan = generate_cir(p, rng);
                break;
            }
            case ChannelKind::Flat: {
                std::vector<double> taps(static_cast<std::size_t>(spec.sys.channel_taps), 0.0);
                taps[0] = 1.0;
                chan = ChannelRealization::from_taps(std::move(taps), false);
                break;
            }
            case ChannelKind::CirFiles: {
                const auto& path =
                    spec.cir_paths[static_cast<std::size_t>(k) % spec.cir_paths.size()];
                chan = load_cir(path).fitted(spec.sys.channel_taps);
                break;
            }
        }
        if (k > 0) chan.power_scale = db_to_amplitude(spec.interferer_power_db);
        channels.push_back(std::move(chan));
    }
    return channels;
}

// Noise variance for an Eb/N0 point: unit bit energy by construction, so
// sigma_n^2 = N0/2 = 1 / (2 * 10^(snr/10)).
inline double noise_variance_for_snr(double snr_db) {
    return 1.0 / (2.0 * db_to_power(snr_db));
}

inline DetectorMode receiver_mode(Receiver r) {
    switch (r) {
        case Receiver::Exact: return DetectorMode::Exact;
        case Receiver::GaussianLc: return DetectorMode::GaussianLc;
        case Receiver::Sic: return DetectorMode::Sic;
        default: break;
    }
    throw ConfigError("receiver has no detector mode");
}

inline bool receiver_is_iterative(Receiver r) {
    return r == Receiver::Exact || r == Receiver::GaussianLc ||
           r == Receiver::Sic;
}

}  // namespace detail

struct BerRow {
    std::string receiver;
    int iteration = 0;  // 0 for the one-shot receivers
    double snr_db = 0.0;
    long long symbols = 0;
    long long errors = 0;
    double ber = 0.0;
    double stderr_value = 0.0;
    int realizations = 0;
};

struct MultRow {
    int realization = 0;
    std::string receiver;
    // Average multiplications per user per symbol per iteration, per the
    // documented counting rules.
    double mults_per_user_per_iteration = 0.0;
};

struct BerTable {
    std::vector<BerRow> rows;
    std::vector<MultRow> mults;
    // Realizations dropped because the exact detector exceeded
    // max_exact_bits, per receiver.
    std::map<std::string, int> excluded;
};

struct ComplexityRow {
    int realization = 0;
    int n_f = 0;
    double threshold_db = 0.0;
    int y = 0;
    int y_tilde = 0;
};

struct ComplexityTable {
    std::vector<ComplexityRow> rows;
};

namespace detail {

struct RealizationBer {
    // errors[receiver][iteration][snr]
    std::vector<std::vector<std::vector<long long>>> errors;
    std::vector<char> excluded;  // per receiver
    std::vector<double> mults_per_user_per_iter;  // per receiver, -1 = n/a
    long long symbols = 0;
};

inline RealizationBer run_ber_realization(const ExperimentSpec& spec,
                                          int realization) {
    const SystemConfig& sys = spec.sys;
    const int num_receivers = static_cast<int>(spec.receivers.size());
    const int num_snr = static_cast<int>(spec.snr_grid_db.size());

    RealizationBer tally;
    tally.excluded.assign(static_cast<std::size_t>(num_receivers), 0);
    tally.mults_per_user_per_iter.assign(static_cast<std::size_t>(num_receivers), -1.0);
    tally.errors.resize(static_cast<std::size_t>(num_receivers));
    for (int r = 0; r < num_receivers; ++r) {
        const int iters =
            detail::receiver_is_iterative(spec.receivers[static_cast<std::size_t>(r)])
                ? sys.iterations
                : 1;
        tally.errors[static_cast<std::size_t>(r)].assign(
            static_cast<std::size_t>(iters),
            std::vector<long long>(static_cast<std::size_t>(num_snr), 0));
    }

    const auto channels = draw_channels(spec, realization);
    SplitRng code_rng(sys.rng_seed, static_cast<std::uint64_t>(realization),
                      kStreamCodes, 0);
    const CodeBook codes = generate_codes(sys, code_rng);
    const SamplingPlan plan = spec.strongest_paths
                                  ? SamplingPlan::strongest_m(sys, channels)
                                  : SamplingPlan::first_m(sys);
    const auto descs = build_collisions(codes, channels, plan, sys);

    // Capacity precheck: a realization whose collision structure cannot be
    // enumerated is excluded for the affected receiver and counted.
    bool need_bound = false;
    for (int r = 0; r < num_receivers; ++r) {
        const Receiver recv = spec.receivers[static_cast<std::size_t>(r)];
        if (recv == Receiver::SingleUserBound) need_bound = true;
        if (recv != Receiver::Exact && recv != Receiver::GaussianLc) continue;
        const DetectorMode mode = receiver_mode(recv);
        for (const auto& user_descs : descs) {
            for (const auto& d : user_descs) {
                if (enumerated_bits(d, mode, spec.det) > spec.det.max_exact_bits) {
                    tally.excluded[static_cast<std::size_t>(r)] = 1;
                    break;
                }
            }
            if (tally.excluded[static_cast<std::size_t>(r)]) break;
        }
    }

    if (spec.count_mults) {
        for (int r = 0; r < num_receivers; ++r) {
            const Receiver recv = spec.receivers[static_cast<std::size_t>(r)];
            if (!receiver_is_iterative(recv) ||
                tally.excluded[static_cast<std::size_t>(r)]) {
                continue;
            }
            const auto counts = count_multiplications(
                descs, receiver_mode(recv), spec.det, sys);
            long long sum = 0;
            for (long long c : counts) sum += c;
            tally.mults_per_user_per_iter[static_cast<std::size_t>(r)] =
                static_cast<double>(sum) /
                static_cast<double>(sys.num_users) /
                static_cast<double>(sys.symbols_per_packet);
        }
    }

    const long long packets =
        (spec.symbols_per_realization + sys.symbols_per_packet - 1) /
        sys.symbols_per_packet;
    tally.symbols = packets * sys.symbols_per_packet;

    // Iterative detector engines are reused across packets; operand
    // construction depends only on (descriptors, mode, noise variance).
    std::vector<std::vector<std::optional<IterativeDetector>>> engines(
        static_cast<std::size_t>(num_receivers));
    for (int r = 0; r < num_receivers; ++r) {
        const Receiver recv = spec.receivers[static_cast<std::size_t>(r)];
        if (!receiver_is_iterative(recv) || tally.excluded[static_cast<std::size_t>(r)]) {
            continue;
        }
        DetectorConfig det = spec.det;
        det.mode = receiver_mode(recv);
        auto& row = engines[static_cast<std::size_t>(r)];
        row.resize(static_cast<std::size_t>(num_snr));
        for (int si = 0; si < num_snr; ++si) {
            row[static_cast<std::size_t>(si)].emplace(
                descs, sys, det,
                noise_variance_for_snr(spec.snr_grid_db[static_cast<std::size_t>(si)]));
        }
    }

    std::vector<double> noise_base(static_cast<std::size_t>(sys.received_length()));
    std::vector<double> received(noise_base.size());
    const std::vector<int> user0{0};

    for (long long pkt = 0; pkt < packets; ++pkt) {
        SplitRng bit_rng(sys.rng_seed, static_cast<std::uint64_t>(realization),
                         kStreamBits, static_cast<std::uint64_t>(pkt));
        const SymbolMatrix bits = generate_bits(sys, bit_rng);

        SplitRng noise_rng(sys.rng_seed, static_cast<std::uint64_t>(realization),
                           kStreamNoise, static_cast<std::uint64_t>(pkt));
        for (double& z : noise_base) z = noise_rng.next_gaussian();

        const auto signal = synthesize_signal(sys, codes, channels, bits);
        std::vector<double> signal_des;
        if (need_bound) {
            signal_des = synthesize_signal(sys, codes, channels, bits, user0);
        }

        for (int si = 0; si < num_snr; ++si) {
            const double sigma_n2 =
                noise_variance_for_snr(spec.snr_grid_db[static_cast<std::size_t>(si)]);
            const double sigma = std::sqrt(sigma_n2);
            for (std::size_t i = 0; i < received.size(); ++i) {
                received[i] = signal[i] + sigma * noise_base[i];
            }

            std::optional<FrontendSamples> front;
            auto frontend = [&]() -> const FrontendSamples& {
                if (!front) front = run_frontend(received, codes, channels, plan, sys);
                return *front;
            };

            for (int r = 0; r < num_receivers; ++r) {
                if (tally.excluded[static_cast<std::size_t>(r)]) continue;
                const Receiver recv = spec.receivers[static_cast<std::size_t>(r)];
                auto& err = tally.errors[static_cast<std::size_t>(r)];

                if (recv == Receiver::MrcRake) {
                    const auto hard = mrc_rake_decide(frontend().combined, codes, sys);
                    for (int i = 0; i < sys.symbols_per_packet; ++i) {
                        err[0][static_cast<std::size_t>(si)] +=
                            hard[0][static_cast<std::size_t>(i)] !=
                            bits.bits[0][static_cast<std::size_t>(i)];
                    }
                } else if (recv == Receiver::SingleUserBound) {
                    // MRC-Rake on the desired user's signal alone.
                    const auto& set = plan.paths[0];
                    const auto& chan = channels[0];
                    for (int i = 0; i < sys.symbols_per_packet; ++i) {
                        double stat = 0.0;
                        for (int j = 0; j < sys.frames_per_symbol; ++j) {
                            const int pulse = i * sys.frames_per_symbol + j;
                            double comb = 0.0;
                            for (std::size_t m = 0; m < set.size(); ++m) {
                                const std::size_t t = static_cast<std::size_t>(
                                    sample_index(pulse, 0, static_cast<int>(m), codes, plan, sys));
                                comb += chan.tap(set[m]) *
                                        (signal_des[t] + sigma * noise_base[t]);
                            }
                            stat += codes.signs[0][static_cast<std::size_t>(pulse)] * comb;
                        }
                        const int hard = stat >= 0.0 ? 1 : -1;
                        err[0][static_cast<std::size_t>(si)] +=
                            hard != bits.bits[0][static_cast<std::size_t>(i)];
                    }
                } else {
                    const auto result =
                        engines[static_cast<std::size_t>(r)][static_cast<std::size_t>(si)]->run(
                            frontend());
                    for (int it = 0; it < sys.iterations; ++it) {
                        const auto& hard =
                            result.decisions[static_cast<std::size_t>(it)];
                        for (int i = 0; i < sys.symbols_per_packet; ++i) {
                            err[static_cast<std::size_t>(it)][static_cast<std::size_t>(si)] +=
                                hard[0][static_cast<std::size_t>(i)] !=
                                bits.bits[0][static_cast<std::size_t>(i)];
                        }
                    }
                }
            }
        }
    }
    return tally;
}

template <typename Fn>
void parallel_over_realizations(int realizations, int threads, Fn&& fn) {
    if (threads <= 1) {
        for (int r = 0; r < realizations; ++r) fn(r);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int workers = std::min(threads, realizations);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int r = next.fetch_add(1); r < realizations;
                 r = next.fetch_add(1)) {
                fn(r);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

// Monte-Carlo BER sweep. Deterministic for a fixed seed regardless of the
// thread count: every realization draws from its own keyed rng streams and
// results are merged in realization order.
inline BerTable run_ber(const ExperimentSpec& spec) {
    spec.validate();
    const int num_receivers = static_cast<int>(spec.receivers.size());
    const int num_snr = static_cast<int>(spec.snr_grid_db.size());

    std::vector<detail::RealizationBer> tallies(
        static_cast<std::size_t>(spec.realizations));
    detail::parallel_over_realizations(
        spec.realizations, spec.threads,
        [&](int r) { tallies[static_cast<std::size_t>(r)] = detail::run_ber_realization(spec, r); });

    BerTable table;
    for (int r = 0; r < num_receivers; ++r) {
        const Receiver recv = spec.receivers[static_cast<std::size_t>(r)];
        const int iters = detail::receiver_is_iterative(recv) ? spec.sys.iterations : 1;

        int included = 0;
        long long symbols = 0;
        std::vector<std::vector<long long>> errors(
            static_cast<std::size_t>(iters),
            std::vector<long long>(static_cast<std::size_t>(num_snr), 0));
        for (int rho = 0; rho < spec.realizations; ++rho) {
            const auto& tally = tallies[static_cast<std::size_t>(rho)];
            if (tally.excluded[static_cast<std::size_t>(r)]) continue;
            ++included;
            symbols += tally.symbols;
            for (int it = 0; it < iters; ++it) {
                for (int si = 0; si < num_snr; ++si) {
                    errors[static_cast<std::size_t>(it)][static_cast<std::size_t>(si)] +=
                        tally.errors[static_cast<std::size_t>(r)][static_cast<std::size_t>(it)]
                                    [static_cast<std::size_t>(si)];
                }
            }
            if (spec.count_mults &&
                tally.mults_per_user_per_iter[static_cast<std::size_t>(r)] >= 0.0) {
                table.mults.push_back(
                    {rho, receiver_name(recv),
                     tally.mults_per_user_per_iter[static_cast<std::size_t>(r)]});
            }
        }
        const int excluded_count = spec.realizations - included;
        if (excluded_count > 0) table.excluded[receiver_name(recv)] = excluded_count;

        for (int it = 0; it < iters; ++it) {
            for (int si = 0; si < num_snr; ++si) {
                BerRow row;
                row.receiver = receiver_name(recv);
                row.iteration = detail::receiver_is_iterative(recv) ? it + 1 : 0;
                row.snr_db = spec.snr_grid_db[static_cast<std::size_t>(si)];
                row.symbols = symbols;
                row.errors = errors[static_cast<std::size_t>(it)][static_cast<std::size_t>(si)];
                row.ber = symbols > 0
                              ? static_cast<double>(row.errors) / static_cast<double>(symbols)
                              : 0.0;
                row.stderr_value = binomial_stderr(row.ber, static_cast<double>(symbols));
                row.realizations = included;
                table.rows.push_back(std::move(row));
            }
        }
    }
    return table;
}

// Convenience: the BER curve of one receiver at one iteration, in grid order.
inline std::vector<double> ber_curve(const BerTable& table,
                                     const std::string& receiver,
                                     int iteration) {
    std::vector<double> out;
    for (const auto& row : table.rows) {
        if (row.receiver == receiver && row.iteration == iteration) {
            out.push_back(row.ber);
        }
    }
    return out;
}

// Collision-complexity measurement: per realization, the maxima over the
// first symbol's N_f pulses (user of interest) of the distinct-collider
// count (Y) and of the strong-collider count under each threshold (Y~).
// No detection is run.
inline ComplexityTable run_complexity(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.complexity_thresholds_db.empty()) {
        throw ConfigError("complexity run needs at least one threshold");
    }

    struct Slot {
        int y = 0;
        std::vector<int> y_tilde;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(spec.realizations));

    detail::parallel_over_realizations(
        spec.realizations, spec.threads, [&](int realization) {
            const auto channels = detail::draw_channels(spec, realization);
            SplitRng code_rng(spec.sys.rng_seed,
                              static_cast<std::uint64_t>(realization),
                              detail::kStreamCodes, 0);
            const CodeBook codes = generate_codes(spec.sys, code_rng);
            const SamplingPlan plan =
                spec.strongest_paths ? SamplingPlan::strongest_m(spec.sys, channels)
                                     : SamplingPlan::first_m(spec.sys);
            const auto descs = build_collisions(codes, channels, plan, spec.sys);

            Slot slot;
            slot.y_tilde.assign(spec.complexity_thresholds_db.size(), 0);
            for (int j = 0; j < spec.sys.frames_per_symbol; ++j) {
                const auto& d = descs[0][static_cast<std::size_t>(j)];
                slot.y = std::max(slot.y, d.num_interferers());
                for (std::size_t ti = 0; ti < spec.complexity_thresholds_db.size(); ++ti) {
                    DetectorConfig det = spec.det;
                    det.mode = DetectorMode::GaussianLc;
                    det.threshold_db = spec.complexity_thresholds_db[ti];
                    det.top_delta.reset();
                    slot.y_tilde[ti] = std::max(
                        slot.y_tilde[ti],
                        enumerated_bits(d, DetectorMode::GaussianLc, det));
                }
            }
            slots[static_cast<std::size_t>(realization)] = std::move(slot);
        });

    ComplexityTable table;
    for (int r = 0; r < spec.realizations; ++r) {
        for (std::size_t ti = 0; ti < spec.complexity_thresholds_db.size(); ++ti) {
            ComplexityRow row;
            row.realization = r;
            row.n_f = spec.sys.frames_per_symbol;
            row.threshold_db = spec.complexity_thresholds_db[ti];
            row.y = slots[static_cast<std::size_t>(r)].y;
            row.y_tilde = slots[static_cast<std::size_t>(r)].y_tilde[ti];
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Result emission. Output is byte-stable for a fixed seed: all values derive
// from integer counts and are formatted with a fixed precision.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void write_ber_csv(const BerTable& table, std::ostream& out) {
    out << "receiver,iteration,snr_db,symbols,errors,ber,stderr,realizations\n";
    for (const auto& r : table.rows) {
        out << r.receiver << ',' << r.iteration << ',' << format_double(r.snr_db)
            << ',' << r.symbols << ',' << r.errors << ',' << format_double(r.ber)
            << ',' << format_double(r.stderr_value) << ',' << r.realizations
            << '\n';
    }
}

inline void write_complexity_csv(const ComplexityTable& table,
                                 std::ostream& out) {
    out << "realization,n_f,threshold_db,y,y_tilde\n";
    for (const auto& r : table.rows) {
        out << r.realization << ',' << r.n_f << ','
            << format_double(r.threshold_db) << ',' << r.y << ',' << r.y_tilde
            << '\n';
    }
}

inline void write_mults_csv(const BerTable& table, std::ostream& out) {
    out << "realization,receiver,mults_per_user_per_iteration\n";
    for (const auto& m : table.mults) {
        out << m.realization << ',' << m.receiver << ','
            << format_double(m.mults_per_user_per_iteration) << '\n';
    }
}

}  // namespace thir

#endif  // THIR_HARNESS_HPP
