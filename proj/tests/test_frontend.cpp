#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "thir/frontend.hpp"
#include "thir/model.hpp"
#include "thir/oracle_suite.hpp"

using namespace thir;

namespace {

// Two users, one frame each, as in the hand-enumerated collision examples:
// N_f = 1, N_c = 4, L = 2, M = 1, user codes {0, c2}.
struct TwoUserSetup {
    SystemConfig cfg;
    CodeBook codes;
    std::vector<ChannelRealization> channels;
    SamplingPlan plan;
};

TwoUserSetup two_user(int c2) {
    TwoUserSetup s;
    s.cfg.num_users = 2;
    s.cfg.symbols_per_packet = 1;
    s.cfg.frames_per_symbol = 1;
    s.cfg.chips_per_frame = 4;
    s.cfg.channel_taps = 2;
    s.cfg.sampled_paths = 1;
    s.codes.th_codes = {{0}, {c2}};
    s.codes.signs = {{1}, {-1}};
    s.channels = {ChannelRealization::from_taps({0.8, 0.6}),
                  ChannelRealization::from_taps({0.6, 0.8})};
    s.plan = SamplingPlan::first_m(s.cfg);
    return s;
}

}  // namespace

TEST_CASE("sample_index evaluates the arrival-time formula") {
    SystemConfig cfg;
    cfg.num_users = 1;
    cfg.symbols_per_packet = 1;
    cfg.frames_per_symbol = 2;
    cfg.chips_per_frame = 10;
    cfg.channel_taps = 3;
    cfg.sampled_paths = 2;
    CodeBook codes;
    codes.th_codes = {{3, 0}};
    codes.signs = {{1, 1}};
    SamplingPlan plan;
    plan.paths = {{0, 1}};

    // Pulse 0, code 3, second sampled tap: 0*10 + 3 + 1.
    REQUIRE(sample_index(0, 0, 1, codes, plan, cfg) == 4);
    // Pulse 1, code 0, first sampled tap: 1*10 + 0 + 0.
    REQUIRE(sample_index(1, 0, 0, codes, plan, cfg) == 10);
    REQUIRE_THROWS_AS(sample_index(2, 0, 0, codes, plan, cfg), ConfigError);
}

TEST_CASE("maximal sample index stays inside the received vector") {
    SystemConfig cfg;
    cfg.num_users = 1;
    cfg.symbols_per_packet = 2;
    cfg.frames_per_symbol = 2;
    cfg.chips_per_frame = 5;
    cfg.channel_taps = 3;
    cfg.sampled_paths = 3;
    CodeBook codes;
    codes.th_codes = {{4, 4, 4, 4}};
    codes.signs = {{1, 1, 1, 1}};
    SamplingPlan plan = SamplingPlan::first_m(cfg);
    const int t = sample_index(cfg.pulses_per_user() - 1, 0,
                               cfg.sampled_paths - 1, codes, plan, cfg);
    REQUIRE(t == cfg.received_length() - 1);
}

TEST_CASE("mrc_combine is the tap-weighted sum of raw samples") {
    SystemConfig cfg;
    cfg.num_users = 1;
    cfg.symbols_per_packet = 1;
    cfg.frames_per_symbol = 1;
    cfg.chips_per_frame = 4;
    cfg.channel_taps = 2;
    cfg.sampled_paths = 2;
    CodeBook codes;
    codes.th_codes = {{0}};
    codes.signs = {{1}};
    std::vector<ChannelRealization> channels{
        ChannelRealization::from_taps({1.0, 0.5}, false)};
    SamplingPlan plan = SamplingPlan::first_m(cfg);

    std::vector<double> r{2.0, 1.0, 0.0, 0.0, 0.0};
    const auto combined = mrc_combine(r, codes, channels, plan, cfg);
    REQUIRE(combined[0][0] == Catch::Approx(2.5));

    // M = 1 with a unit tap reproduces the raw sample.
    cfg.sampled_paths = 1;
    const auto single = mrc_combine(r, codes,
                                    {ChannelRealization::from_taps({1.0}, false)
                                         .fitted(2, false)},
                                    SamplingPlan::first_m(cfg), cfg);
    REQUIRE(single[0][0] == Catch::Approx(2.0));

    // All-zero received vector combines to zero.
    std::vector<double> zeros(r.size(), 0.0);
    const auto z = mrc_combine(zeros, codes, channels, plan, cfg);
    REQUIRE(z[0][0] == 0.0);
}

TEST_CASE("disjoint codes produce an empty collision set") {
    const auto s = two_user(1);
    const auto descs = build_collisions(s.codes, s.channels, s.plan, s.cfg);
    // User 0 samples instant 0; user 1's pulse covers samples 1..2 only.
    REQUIRE(descs[0][0].num_interferers() == 0);
    REQUIRE(descs[0][0].amp ==
            Catch::Approx(s.channels[0].taps[0] * s.channels[0].taps[0]));
}

TEST_CASE("aligned codes record the interferer with its tap coefficient") {
    const auto s = two_user(0);
    const auto descs = build_collisions(s.codes, s.channels, s.plan, s.cfg);
    const auto& d = descs[0][0];
    REQUIRE(d.num_interferers() == 1);
    REQUIRE(d.interferers[0] == PulseRef{1, 0});
    REQUIRE(d.path_rows[0].size() == 1);
    // Coefficient: sign_2 * (1/sqrt(1)) * h_1^(2) = -1 * 0.6.
    REQUIRE(d.path_rows[0][0].second == Catch::Approx(-0.6));
}

TEST_CASE("single user without IFI never collides") {
    SystemConfig cfg;
    cfg.num_users = 1;
    cfg.symbols_per_packet = 3;
    cfg.frames_per_symbol = 2;
    cfg.chips_per_frame = 6;
    cfg.channel_taps = 3;
    cfg.sampled_paths = 3;
    cfg.no_ifi = true;
    SplitRng rng(17);
    const CodeBook codes = generate_codes(cfg, rng);
    std::vector<ChannelRealization> channels{
        ChannelRealization::from_taps({0.7, 0.5, 0.3})};
    const auto descs =
        build_collisions(codes, channels, SamplingPlan::first_m(cfg), cfg);
    for (const auto& d : descs[0]) REQUIRE(d.num_interferers() == 0);
}

TEST_CASE("collision counts are nondecreasing in the sampled path count") {
    SplitRng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = oracle::random_instance(rng);
        SystemConfig cfg = inst.cfg;
        if (cfg.sampled_paths >= cfg.channel_taps) continue;
        const auto fewer =
            build_collisions(inst.codes, inst.channels, SamplingPlan::first_m(cfg), cfg);
        cfg.sampled_paths += 1;
        const auto more =
            build_collisions(inst.codes, inst.channels, SamplingPlan::first_m(cfg), cfg);
        for (int k = 0; k < cfg.num_users; ++k) {
            for (int j = 0; j < cfg.pulses_per_user(); ++j) {
                REQUIRE(more[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)].num_interferers() >=
                        fewer[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)].num_interferers());
            }
        }
    }
}

TEST_CASE("descriptor decomposition reconstructs noiseless combined samples") {
    const auto res = oracle::check_reconstruction(60, 91);
    INFO(res.detail);
    REQUIRE(res.worst <= res.tolerance);
}

TEST_CASE("every recorded interferer has a nonzero coefficient somewhere") {
    SplitRng rng(29);
    const auto inst = oracle::random_instance(rng);
    for (const auto& user_descs : inst.descs) {
        for (const auto& d : user_descs) {
            std::vector<char> seen(static_cast<std::size_t>(d.num_interferers()), 0);
            for (const auto& row : d.path_rows) {
                for (const auto& [idx, w] : row) {
                    REQUIRE(w != 0.0);
                    seen[static_cast<std::size_t>(idx)] = 1;
                }
            }
            for (char s : seen) REQUIRE(s == 1);
        }
    }
}

TEST_CASE("strongest-path plan selects the largest-magnitude taps") {
    SystemConfig cfg;
    cfg.num_users = 1;
    cfg.symbols_per_packet = 1;
    cfg.frames_per_symbol = 1;
    cfg.chips_per_frame = 8;
    cfg.channel_taps = 4;
    cfg.sampled_paths = 2;
    std::vector<ChannelRealization> channels{
        ChannelRealization::from_taps({0.1, -0.9, 0.2, 0.5}, false)};
    const auto plan = SamplingPlan::strongest_m(cfg, channels);
    REQUIRE(plan.paths[0] == std::vector<int>{1, 3});
}
