#pragma once

#include <array>
#include <cstdint>

namespace stpod {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A block of four 32-bit outputs is a pure function of a 128-bit counter
/// and a 64-bit key, so any sample of any stream can be computed without
/// generating its predecessors. Seeds are therefore portable: an
/// implementation in another language reproduces a stream given only the
/// seed and the counter layout documented on NormalStream.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key);
};

/// Stream of standard normal deviates.
///
/// Layout: key = (seed low 32 bits, seed high 32 bits); the counter for
/// block b is (b low, b high, stream low, stream high). Each block yields two
/// uniforms u = ((x >> 11) + 0.5) * 2^-53 from its two 64-bit halves
/// (word0 | word1 << 32, word2 | word3 << 32), turned into two normals by
/// Box-Muller: r = sqrt(-2 ln u1), (r cos 2 pi u2, r sin 2 pi u2).
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream);

    double next();
    double uniform();  ///< consumes a whole block, returns u1

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;

    Philox4x32::Counter draw_block();
};

/// Derives a child seed from a parent seed and up to three indices.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace stpod
