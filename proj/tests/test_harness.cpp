#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "thir/experiment_io.hpp"
#include "thir/harness.hpp"

using namespace thir;

namespace {

ExperimentSpec tiny_spec() {
    ExperimentSpec spec = ExperimentSpec::desk_default();
    spec.sys.num_users = 2;
    spec.sys.symbols_per_packet = 10;
    spec.sys.frames_per_symbol = 2;
    spec.sys.chips_per_frame = 10;
    spec.sys.channel_taps = 3;
    spec.sys.sampled_paths = 2;
    spec.sys.iterations = 2;
    spec.sys.no_ifi = true;
    spec.sys.rng_seed = 77;
    spec.snr_grid_db = {0.0, 6.0};
    spec.receivers = {Receiver::MrcRake, Receiver::Exact, Receiver::GaussianLc,
                      Receiver::Sic, Receiver::SingleUserBound};
    spec.realizations = 3;
    spec.symbols_per_realization = 30;
    spec.count_mults = true;
    return spec;
}

}  // namespace

TEST_CASE("config parsing round trip") {
    std::istringstream in(
        "# experiment\n"
        "num_users = 3\n"
        "symbols_per_packet = 50\n"
        "frames_per_symbol = 4\n"
        "chips_per_frame = 40   # desk scale\n"
        "channel_taps = 12\n"
        "sampled_paths = 6\n"
        "iterations = 2\n"
        "seed = 99\n"
        "no_ifi = true\n"
        "channel = cm3-like\n"
        "snr_db = 0, 4, 8\n"
        "receivers = mrc_rake, sic\n"
        "interferer_power_db = 10\n"
        "realizations = 7\n"
        "symbols_per_realization = 1000\n"
        "detector_threshold_db = 3\n"
        "max_exact_bits = 12\n"
        "llr_clamp = 40\n"
        "complexity_thresholds_db = -10, 0, 3\n"
        "threads = 2\n"
        "format = json\n");
    const auto spec = parse_experiment_config(in);
    REQUIRE(spec.sys.num_users == 3);
    REQUIRE(spec.sys.symbols_per_packet == 50);
    REQUIRE(spec.sys.frames_per_symbol == 4);
    REQUIRE(spec.sys.chips_per_frame == 40);
    REQUIRE(spec.sys.rng_seed == 99);
    REQUIRE(spec.sys.no_ifi);
    REQUIRE(spec.channel_kind == ChannelKind::Cm3Like);
    REQUIRE(spec.snr_grid_db == std::vector<double>{0, 4, 8});
    REQUIRE(spec.receivers ==
            std::vector<Receiver>{Receiver::MrcRake, Receiver::Sic});
    REQUIRE(spec.realizations == 7);
    REQUIRE(spec.det.threshold_db == 3.0);
    REQUIRE(spec.det.max_exact_bits == 12);
    REQUIRE(spec.det.llr_clamp == 40.0);
    REQUIRE(spec.complexity_thresholds_db == std::vector<double>{-10, 0, 3});
    REQUIRE(spec.threads == 2);
    REQUIRE(spec.format == "json");
    spec.validate();
}

TEST_CASE("config parser rejects unknown keys and malformed lines") {
    std::istringstream bad1("definitely_not_a_key = 3\n");
    REQUIRE_THROWS_AS(parse_experiment_config(bad1), ConfigError);
    std::istringstream bad2("num_users 3\n");
    REQUIRE_THROWS_AS(parse_experiment_config(bad2), ConfigError);
    std::istringstream bad3("num_users = x\n");
    REQUIRE_THROWS_AS(parse_experiment_config(bad3), ConfigError);
    std::istringstream bad4("channel = cm7\n");
    REQUIRE_THROWS_AS(parse_experiment_config(bad4), ConfigError);
}

TEST_CASE("empty receiver list fails before any run") {
    ExperimentSpec spec = tiny_spec();
    spec.receivers.clear();
    REQUIRE_THROWS_AS(run_ber(spec), ConfigError);
    spec = tiny_spec();
    spec.snr_grid_db.clear();
    REQUIRE_THROWS_AS(run_ber(spec), ConfigError);
}

TEST_CASE("ber output is byte-identical across thread counts") {
    ExperimentSpec s1 = tiny_spec();
    s1.threads = 1;
    ExperimentSpec s3 = tiny_spec();
    s3.threads = 3;

    const auto t1 = run_ber(s1);
    const auto t3 = run_ber(s3);

    std::ostringstream o1;
    std::ostringstream o3;
    write_ber_csv(t1, o1);
    write_ber_csv(t3, o3);
    REQUIRE(o1.str() == o3.str());

    std::ostringstream m1;
    std::ostringstream m3;
    write_mults_csv(t1, m1);
    write_mults_csv(t3, m3);
    REQUIRE(m1.str() == m3.str());

    // And across repeated runs with the same seed.
    const auto t1b = run_ber(s1);
    std::ostringstream o1b;
    write_ber_csv(t1b, o1b);
    REQUIRE(o1.str() == o1b.str());
}

TEST_CASE("ber csv schema") {
    ExperimentSpec spec = tiny_spec();
    spec.receivers = {Receiver::MrcRake, Receiver::Sic};
    const auto table = run_ber(spec);
    std::ostringstream out;
    write_ber_csv(table, out);
    std::istringstream lines(out.str());
    std::string header;
    std::getline(lines, header);
    REQUIRE(header ==
            "receiver,iteration,snr_db,symbols,errors,ber,stderr,realizations");
    // mrc_rake: 2 snr points (iteration 0); sic: 2 iterations x 2 snr.
    REQUIRE(table.rows.size() == 2 + 4);
    for (const auto& row : table.rows) {
        REQUIRE(row.ber >= 0.0);
        REQUIRE(row.ber <= 1.0);
        REQUIRE(row.symbols == 3 * 30);
        REQUIRE(row.realizations == 3);
    }
}

TEST_CASE("complexity records have Y~ <= Y and honor the schema") {
    ExperimentSpec spec = tiny_spec();
    spec.sys.num_users = 6;
    spec.sys.no_ifi = false;
    spec.realizations = 10;
    spec.complexity_thresholds_db = {-10.0, 0.0, 10.0};
    const auto table = run_complexity(spec);
    REQUIRE(table.rows.size() == 30);
    for (const auto& row : table.rows) {
        REQUIRE(row.y_tilde <= row.y);
        REQUIRE(row.n_f == spec.sys.frames_per_symbol);
    }

    std::ostringstream out;
    write_complexity_csv(table, out);
    std::istringstream lines(out.str());
    std::string header;
    std::getline(lines, header);
    REQUIRE(header == "realization,n_f,threshold_db,y,y_tilde");

    // Determinism across thread counts.
    ExperimentSpec spec2 = spec;
    spec2.threads = 4;
    const auto table2 = run_complexity(spec2);
    std::ostringstream out2;
    write_complexity_csv(table2, out2);
    REQUIRE(out.str() == out2.str());
}

TEST_CASE("capacity overruns exclude the realization and are counted") {
    ExperimentSpec spec = tiny_spec();
    spec.sys.num_users = 4;
    spec.sys.no_ifi = false;  // self-IFI guarantees collisions
    spec.sys.chips_per_frame = 4;
    spec.sys.channel_taps = 3;
    spec.sys.sampled_paths = 3;
    spec.det.max_exact_bits = 0;
    spec.receivers = {Receiver::Exact, Receiver::Sic};
    spec.count_mults = false;
    const auto table = run_ber(spec);
    REQUIRE(table.excluded.at("exact") == spec.realizations);
    REQUIRE(table.excluded.count("sic") == 0);
    for (const auto& row : table.rows) {
        if (row.receiver == "exact") {
            REQUIRE(row.realizations == 0);
            REQUIRE(row.symbols == 0);
            REQUIRE(row.ber == 0.0);
        } else {
            REQUIRE(row.realizations == spec.realizations);
        }
    }
}

TEST_CASE("single user without IFI has zero collision complexity") {
    ExperimentSpec spec = tiny_spec();
    spec.sys.num_users = 1;
    spec.sys.no_ifi = true;
    spec.realizations = 5;
    const auto table = run_complexity(spec);
    for (const auto& row : table.rows) {
        REQUIRE(row.y == 0);
        REQUIRE(row.y_tilde == 0);
    }
}

TEST_CASE("flat-channel single-user bound matches the Q-function anchor") {
    ExperimentSpec spec;
    spec.sys.num_users = 1;
    spec.sys.symbols_per_packet = 500;
    spec.sys.frames_per_symbol = 1;
    spec.sys.chips_per_frame = 1;
    spec.sys.channel_taps = 1;
    spec.sys.sampled_paths = 1;
    spec.sys.iterations = 1;
    spec.sys.rng_seed = 11;
    spec.channel_kind = ChannelKind::Flat;
    spec.snr_grid_db = {4.0};
    spec.receivers = {Receiver::SingleUserBound, Receiver::MrcRake};
    spec.realizations = 1;
    spec.symbols_per_realization = 100000;
    const auto table = run_ber(spec);
    const double expected = q_function(std::sqrt(2.0 * db_to_power(4.0)));
    for (const auto& row : table.rows) {
        INFO(row.receiver << " ber=" << row.ber << " expected=" << expected);
        REQUIRE(std::abs(row.ber - expected) <=
                3.0 * binomial_stderr(expected, static_cast<double>(row.symbols)));
    }
}

TEST_CASE("emit_results writes files and rejects empty tables") {
    const std::string path = "/tmp/thir_test_out.csv";
    ExperimentSpec spec = tiny_spec();
    spec.receivers = {Receiver::MrcRake};
    spec.count_mults = false;
    const auto table = run_ber(spec);
    emit_results(table, "csv", path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header ==
            "receiver,iteration,snr_db,symbols,errors,ber,stderr,realizations");

    BerTable empty;
    REQUIRE_THROWS_AS(emit_results(empty, "csv", path), ConfigError);

    emit_results(table, "json", "/tmp/thir_test_out.json");
    std::ifstream jin("/tmp/thir_test_out.json");
    REQUIRE(jin.good());
}

TEST_CASE("json emission mirrors the csv schema") {
    ExperimentSpec spec = tiny_spec();
    spec.receivers = {Receiver::MrcRake};
    spec.count_mults = false;
    const auto table = run_ber(spec);
    std::ostringstream out;
    write_ber_json(table, out);
    const auto parsed = nlohmann::json::parse(out.str());
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == table.rows.size());
    REQUIRE(parsed[0].contains("receiver"));
    REQUIRE(parsed[0].contains("snr_db"));
    REQUIRE(parsed[0].contains("stderr"));
}
