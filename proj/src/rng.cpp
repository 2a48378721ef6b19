#include "stpod/rng.hpp"

#include <cmath>
#include <numbers>

namespace stpod {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

Philox4x32::Counter NormalStream::draw_block() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(stream_),
                                  static_cast<std::uint32_t>(stream_ >> 32)};
    ++block_;
    return Philox4x32::block(ctr, key_);
}

double NormalStream::uniform() {
    const auto out = draw_block();
    return to_unit(static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32));
}

double NormalStream::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const auto out = draw_block();
    const double u1 = to_unit(static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32));
    const double u2 = to_unit(static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    // Two blocks so every index contributes to all 64 output bits.
    const Philox4x32::Key key{static_cast<std::uint32_t>(parent), static_cast<std::uint32_t>(parent >> 32)};
    const auto first = Philox4x32::block({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)},
                                         key);
    const auto second = Philox4x32::block({first[0] ^ static_cast<std::uint32_t>(c),
                                           first[1] ^ static_cast<std::uint32_t>(c >> 32), first[2], first[3]},
                                          key);
    return static_cast<std::uint64_t>(second[0]) | (static_cast<std::uint64_t>(second[1]) << 32);
}

}  // namespace stpod
