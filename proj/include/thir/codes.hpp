#ifndef THIR_CODES_HPP
#define THIR_CODES_HPP

#include <cstdint>
#include <vector>

#include "thir/config.hpp"
#include "thir/rng.hpp"

namespace thir {

// Per-user time-hopping codes and polarity signs for one packet.
// th_codes[k][j] is the chip offset of pulse j inside frame j; signs[k][j]
// is the polarity randomization bit. Nonzero spreading elements therefore
// sit at chip j*N_c + th_codes[k][j] with value signs[k][j] / sqrt(N_f).
struct CodeBook {
    std::vector<std::vector<int>> th_codes;
    std::vector<std::vector<std::int8_t>> signs;

    int pulse_position(int user, int pulse, const SystemConfig& cfg) const {
        return pulse * cfg.chips_per_frame + th_codes[user][pulse];
    }
};

inline CodeBook generate_codes(const SystemConfig& cfg, SplitRng& rng) {
    cfg.validate();
    const int pulses = cfg.pulses_per_user();
    const int range = cfg.code_range();
    CodeBook book;
    book.th_codes.assign(cfg.num_users, std::vector<int>(pulses, 0));
    book.signs.assign(cfg.num_users, std::vector<std::int8_t>(pulses, 1));
    for (int k = 0; k < cfg.num_users; ++k) {
        for (int j = 0; j < pulses; ++j) {
            book.th_codes[k][j] = range > 1 ? rng.next_int(range) : 0;
            book.signs[k][j] = static_cast<std::int8_t>(rng.next_sign());
        }
    }
    return book;
}

// Transmitted information bits, one antipodal symbol per user per symbol
// interval. Every pulse in a symbol's frame block carries the same bit.
struct SymbolMatrix {
    std::vector<std::vector<std::int8_t>> bits;  // [user][symbol]

    int pulse_bit(int user, int pulse, const SystemConfig& cfg) const {
        return bits[user][pulse / cfg.frames_per_symbol];
    }
};

inline SymbolMatrix generate_bits(const SystemConfig& cfg, SplitRng& rng) {
    SymbolMatrix m;
    m.bits.assign(cfg.num_users,
                  std::vector<std::int8_t>(cfg.symbols_per_packet, 1));
    for (auto& row : m.bits) {
        for (auto& b : row) b = static_cast<std::int8_t>(rng.next_sign());
    }
    return m;
}

}  // namespace thir

#endif  // THIR_CODES_HPP
