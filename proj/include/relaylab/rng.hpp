#pragma once
// Counter-based RNG: Philox4x64-10 keyed by (master_seed, stream_index).
// Each stream is a pure function of its key, so trial results are independent
// of worker scheduling. Gaussian draws use Box-Muller with fixed consumption
// (exactly two 64-bit words per complex entry) to keep streams aligned.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace relaylab {

// Philox4x64-10 round constants (Salmon et al., as used by numpy's Philox).
// numpy's random_raw pre-increments its counter, so numpy block b equals this
// function at counter b+1; the known-answer tests encode that offset.
struct Philox4x64 {
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                            std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const auto p0 = static_cast<unsigned __int128>(kMul0) * ctr[0];
      const auto p1 = static_cast<unsigned __int128>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint64_t>(p1 >> 64) ^ ctr[1] ^ key[0],
             static_cast<std::uint64_t>(p1),
             static_cast<std::uint64_t>(p0 >> 64) ^ ctr[3] ^ key[1],
             static_cast<std::uint64_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

// One deterministic word/Gaussian stream for a (master_seed, stream_index)
// pair. Copyable and movable; no shared state.
class SeededRng {
 public:
  SeededRng(std::uint64_t master_seed, std::uint64_t stream_index)
      : key_{master_seed, stream_index} {}

  std::uint64_t master_seed() const { return key_[0]; }
  std::uint64_t stream_index() const { return key_[1]; }

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      buf_ = Philox4x64::block({block_++, 0, 0, 0}, key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  // CN(0,1): real and imaginary parts i.i.d. N(0, 1/2).
  // u1 in (0,1] (log-safe), u2 in [0,1); 53-bit mantissas.
  std::complex<double> next_cn() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1p-53;
    const double r = std::sqrt(-std::log(u1));
    const double phi = 2.0 * kPi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  static constexpr double kPi = 3.14159265358979323846264338327950288;
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> buf_{};
  std::uint64_t block_ = 0;
  int pos_ = 4;
};

}  // namespace relaylab
