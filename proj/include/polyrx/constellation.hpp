#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polyrx/iq.hpp"

namespace polyrx {

enum class Modulation { BPSK, QPSK, PSK8, QAM16, QAM32, QAM64 };

int bits_per_symbol(Modulation m);
std::string to_string(Modulation m);
Modulation modulation_from_string(const std::string& s);

// Constellation table for `m`, indexed by bit label (MSB first). Every
// table has unit average energy. PSK labels are Gray-coded; square QAM uses
// per-axis Gray coding (first half of the label bits select the I level,
// second half the Q level); 32-QAM is a cross constellation with a
// quasi-Gray labeling along a snake walk of the points.
const std::vector<cpx>& constellation(Modulation m);

cpx map_symbol(Modulation m, unsigned label);

// Hard decision: label of the nearest constellation point (lowest label on
// exact ties).
unsigned demap_symbol(Modulation m, cpx y);

// Bit-sequence helpers. `bits.size()` must be divisible by
// bits_per_symbol(m) for symbols_from_bits.
std::vector<cpx> symbols_from_bits(Modulation m, const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> bits_from_symbols(Modulation m, const std::vector<cpx>& symbols);

}  // namespace polyrx
