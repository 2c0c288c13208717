#pragma once

#include "mtl/common.hpp"

#include <array>
#include <cstdint>
#include <limits>

namespace mtl {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011 construction).
///
/// A (seed, stream) pair selects the key; the 128-bit counter walks the stream.
/// Output is platform independent, so draws are reproducible bit for bit.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// One application of the ten-round bijection.
    static Counter block(Counter ctr, Key key) noexcept;

    /// Uniform double in (0, 1), 53 random bits.
    double uniform() noexcept;

private:
    void refill() noexcept;

    Key key_{};
    Counter ctr_{};
    Counter buf_{};
    int pos_ = 4;
};

/// Standard normal draws by the Box-Muller transform over a Philox stream.
class NormalSource {
public:
    explicit NormalSource(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept : gen_(seed, stream) {}

    double operator()() noexcept;

    template <typename Scalar = double>
    Matrix<Scalar> matrix(Index rows, Index cols) {
        Matrix<Scalar> out(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) out(r, c) = Scalar((*this)());
        return out;
    }

    Philox4x32& engine() noexcept { return gen_; }

private:
    Philox4x32 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Per-stream seed derivation for fan-out: seed xor stream index.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept { return seed ^ stream; }

}  // namespace mtl
