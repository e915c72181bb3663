#include "polyrx/constellation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "polyrx/errors.hpp"

namespace polyrx {

int bits_per_symbol(Modulation m) {
    switch (m) {
        case Modulation::BPSK: return 1;
        case Modulation::QPSK: return 2;
        case Modulation::PSK8: return 3;
        case Modulation::QAM16: return 4;
        case Modulation::QAM32: return 5;
        case Modulation::QAM64: return 6;
    }
    throw ParamError("unknown modulation");
}

std::string to_string(Modulation m) {
    switch (m) {
        case Modulation::BPSK: return "BPSK";
        case Modulation::QPSK: return "QPSK";
        case Modulation::PSK8: return "8PSK";
        case Modulation::QAM16: return "QAM16";
        case Modulation::QAM32: return "QAM32";
        case Modulation::QAM64: return "QAM64";
    }
    throw ParamError("unknown modulation");
}

Modulation modulation_from_string(const std::string& s) {
    if (s == "BPSK") return Modulation::BPSK;
    if (s == "QPSK") return Modulation::QPSK;
    if (s == "8PSK" || s == "PSK8") return Modulation::PSK8;
    if (s == "QAM16" || s == "16QAM") return Modulation::QAM16;
    if (s == "QAM32" || s == "32QAM") return Modulation::QAM32;
    if (s == "QAM64" || s == "64QAM") return Modulation::QAM64;
    throw ParamError("unknown modulation name: " + s);
}

namespace {

unsigned gray_encode(unsigned v) { return v ^ (v >> 1); }

unsigned gray_decode(unsigned g) {
    unsigned v = 0;
    for (; g; g >>= 1) v ^= g;
    return v;
}

// Square QAM: the first half of the label bits Gray-selects the I level,
// the second half the Q level. Levels ascend {-(L-1), ..., -1, 1, ..., L-1}.
std::vector<cpx> square_qam(int bits_per_axis, double norm) {
    const int levels = 1 << bits_per_axis;
    std::vector<cpx> table(static_cast<std::size_t>(levels) * levels);
    auto level_value = [&](unsigned axis_label) {
        const int idx = static_cast<int>(gray_decode(axis_label));
        return static_cast<double>(2 * idx - (levels - 1)) * norm;
    };
    for (unsigned li = 0; li < static_cast<unsigned>(levels); ++li) {
        for (unsigned lq = 0; lq < static_cast<unsigned>(levels); ++lq) {
            const unsigned label = (li << bits_per_axis) | lq;
            table[label] = cpx(level_value(li), level_value(lq));
        }
    }
    return table;
}

// 32-point cross constellation (6x6 grid minus the four corners),
// quasi-Gray labeled along a column-by-column snake walk so consecutive
// points on the walk differ in one label bit.
std::vector<cpx> cross_qam32() {
    const double norm = 1.0 / std::sqrt(20.0);
    const std::array<int, 6> levels = {-5, -3, -1, 1, 3, 5};
    std::vector<cpx> points;
    for (std::size_t col = 0; col < levels.size(); ++col) {
        const int i = levels[col];
        std::vector<int> qs;
        for (int q : levels) {
            if (std::abs(i) == 5 && std::abs(q) == 5) continue;  // clipped corner
            qs.push_back(q);
        }
        if (col % 2 == 1) std::reverse(qs.begin(), qs.end());  // snake
        for (int q : qs) points.emplace_back(i * norm, q * norm);
    }
    std::vector<cpx> table(32);
    for (unsigned walk = 0; walk < 32; ++walk) table[gray_encode(walk)] = points[walk];
    return table;
}

std::vector<cpx> build_table(Modulation m) {
    switch (m) {
        case Modulation::BPSK:
            return {cpx(1.0, 0.0), cpx(-1.0, 0.0)};
        case Modulation::QPSK: {
            // label = (b0 << 1) | b1; I from b0, Q from b1.
            const double s = 1.0 / std::sqrt(2.0);
            std::vector<cpx> t(4);
            for (unsigned label = 0; label < 4; ++label) {
                const double i = (label & 2) ? -s : s;
                const double q = (label & 1) ? -s : s;
                t[label] = cpx(i, q);
            }
            return t;
        }
        case Modulation::PSK8: {
            std::vector<cpx> t(8);
            for (unsigned pos = 0; pos < 8; ++pos) {
                const double ang = 2.0 * M_PI * pos / 8.0;
                t[gray_encode(pos)] = cpx(std::cos(ang), std::sin(ang));
            }
            return t;
        }
        case Modulation::QAM16:
            return square_qam(2, 1.0 / std::sqrt(10.0));
        case Modulation::QAM32:
            return cross_qam32();
        case Modulation::QAM64:
            return square_qam(3, 1.0 / std::sqrt(42.0));
    }
    throw ParamError("unknown modulation");
}

const std::vector<cpx>& table(Modulation m) {
    static const std::map<Modulation, std::vector<cpx>> tables = [] {
        std::map<Modulation, std::vector<cpx>> t;
        for (Modulation m : {Modulation::BPSK, Modulation::QPSK, Modulation::PSK8,
                             Modulation::QAM16, Modulation::QAM32, Modulation::QAM64})
            t.emplace(m, build_table(m));
        return t;
    }();
    return tables.at(m);
}

}  // namespace

const std::vector<cpx>& constellation(Modulation m) { return table(m); }

cpx map_symbol(Modulation m, unsigned label) {
    const auto& t = table(m);
    if (label >= t.size()) throw ParamError("symbol label out of range");
    return t[label];
}

unsigned demap_symbol(Modulation m, cpx y) {
    const auto& t = table(m);
    unsigned best = 0;
    double best_d = std::norm(y - t[0]);
    for (unsigned i = 1; i < t.size(); ++i) {
        const double d = std::norm(y - t[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<cpx> symbols_from_bits(Modulation m, const std::vector<std::uint8_t>& bits) {
    const int bps = bits_per_symbol(m);
    if (bits.size() % static_cast<std::size_t>(bps) != 0)
        throw ShapeError("bit count " + std::to_string(bits.size()) +
                         " not divisible by bits per symbol " + std::to_string(bps));
    std::vector<cpx> out(bits.size() / bps);
    for (std::size_t s = 0; s < out.size(); ++s) {
        unsigned label = 0;
        for (int b = 0; b < bps; ++b) label = (label << 1) | (bits[s * bps + b] & 1u);
        out[s] = map_symbol(m, label);
    }
    return out;
}

std::vector<std::uint8_t> bits_from_symbols(Modulation m, const std::vector<cpx>& symbols) {
    const int bps = bits_per_symbol(m);
    std::vector<std::uint8_t> out(symbols.size() * bps);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const unsigned label = demap_symbol(m, symbols[s]);
        for (int b = 0; b < bps; ++b)
            out[s * bps + b] = static_cast<std::uint8_t>((label >> (bps - 1 - b)) & 1u);
    }
    return out;
}

}  // namespace polyrx
