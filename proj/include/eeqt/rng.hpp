#pragma once

#include <array>
#include <cstdint>

namespace eeqt {

/// One Philox4x32-10 block (Salmon, Moraes, Dror, Shaw, SC'11 parameters).
/// Pure function of (counter, key); the basis for all randomness here.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Source of uniform doubles in [0, 1). Virtual so tests can inject fixed
/// draw sequences into the trajectory engine.
class UniformSource {
  public:
    virtual ~UniformSource() = default;
    virtual double next() = 0;
};

/// Counter-based uniform stream. The key carries the master seed, the high
/// counter words carry the stream index, the low words count blocks, so
/// streams for distinct (seed, index) pairs never overlap and a draw's value
/// is independent of execution order. Each block yields two 53-bit doubles.
class PhiloxStream final : public UniformSource {
  public:
    PhiloxStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : key_{static_cast<std::uint32_t>(master_seed),
               static_cast<std::uint32_t>(master_seed >> 32)},
          stream_(stream_index) {}

    std::uint64_t next_u64() {
        if (avail_ == 0) refill();
        return buf_[--avail_];
    }

    double next() override {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

  private:
    void refill() {
        const auto out = philox4x32_10(
            {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
            key_);
        ++block_;
        // buf_ is consumed from the back: words (0,1) first, then (2,3)
        buf_[1] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
        buf_[0] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
        avail_ = 2;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int avail_ = 0;
};

}  // namespace eeqt
