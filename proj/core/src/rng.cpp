#include "kfp/rng.hpp"

#include <cmath>

namespace kfp {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Ziggurat tables (128 layers, Doornik's ZIGNOR layout).
struct Ziggurat {
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;
  std::array<double, 129> x{};
  std::array<double, 128> ratio{};
  Ziggurat() {
    double f = std::exp(-0.5 * kR * kR);
    x[0] = kV / f;
    x[1] = kR;
    x[128] = 0.0;
    for (int i = 2; i < 128; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(kV / x[i - 1] + f));
      f = std::exp(-0.5 * x[i] * x[i]);
    }
    for (int i = 0; i < 128; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

const Ziggurat kZig;

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
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

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t first_block) noexcept
    : seed_(master_seed), id_(stream_id), first_block_(first_block), block_(first_block) {}

void RngStream::refill() noexcept {
  // kBlocks independent counters per refill so the rounds interleave.
  std::uint32_t c0[kBlocks], c1[kBlocks], c2[kBlocks], c3[kBlocks];
  for (int b = 0; b < kBlocks; ++b) {
    const std::uint64_t blk = block_ + static_cast<std::uint64_t>(b);
    c0[b] = static_cast<std::uint32_t>(blk);
    c1[b] = static_cast<std::uint32_t>(blk >> 32);
    c2[b] = static_cast<std::uint32_t>(id_);
    c3[b] = static_cast<std::uint32_t>(id_ >> 32);
  }
  std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    for (int b = 0; b < kBlocks; ++b) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0[b];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2[b];
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[b] ^ k0;
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[b] ^ k1;
      c1[b] = static_cast<std::uint32_t>(p1);
      c3[b] = static_cast<std::uint32_t>(p0);
      c0[b] = n0;
      c2[b] = n2;
    }
  }
  for (int b = 0; b < kBlocks; ++b) {
    buffer_[4 * b] = c0[b];
    buffer_[4 * b + 1] = c1[b];
    buffer_[4 * b + 2] = c2[b];
    buffer_[4 * b + 3] = c3[b];
  }
  block_ += kBlocks;
  used_ = 0;
}

std::uint32_t RngStream::next_u32() noexcept {
  if (used_ == kBuffer) refill();
  return buffer_[used_++];
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double RngStream::uniform() noexcept {
  // 53 random bits, shifted by half an ulp so that 0 and 1 are never returned.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
  for (;;) {
    const std::uint64_t bits = next_u64();
    const int i = static_cast<int>(bits & 127);
    // Uniform on (-1, 1) from the top 53 bits.
    const double u = 2.0 * ((static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53) - 1.0;
    if (std::abs(u) < kZig.ratio[i]) return u * kZig.x[i];
    if (i == 0) {
      double x, y;
      do {
        x = std::log(uniform()) / Ziggurat::kR;
        y = std::log(uniform());
      } while (-2.0 * y < x * x);
      return u > 0.0 ? Ziggurat::kR - x : x - Ziggurat::kR;
    }
    const double xx = u * kZig.x[i];
    const double f0 = std::exp(-0.5 * (kZig.x[i] * kZig.x[i] - xx * xx));
    const double f1 = std::exp(-0.5 * (kZig.x[i + 1] * kZig.x[i + 1] - xx * xx));
    if (f1 + uniform() * (f0 - f1) < 1.0) return xx;
  }
}

double RngStream::exponential() noexcept { return -std::log(uniform()); }

}  // namespace kfp
