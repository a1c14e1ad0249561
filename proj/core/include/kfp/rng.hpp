#pragma once

#include <array>
#include <cstdint>

namespace kfp {

/// Philox4x32-10 block cipher (Salmon et al., SC'11). Maps a 128-bit counter
/// and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Where a stream (or a path built from one) came from.
struct RngProvenance {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t first_block = 0;
};

/// Stream identifiers reserve the top 24 bits for a purpose tag so distinct
/// ensembles of one run never share a substream.
constexpr std::uint64_t make_stream_id(std::uint32_t purpose, std::uint64_t index) noexcept {
  return (static_cast<std::uint64_t>(purpose & 0xFFFFFFu) << 40) | (index & ((1ULL << 40) - 1));
}

/// Counter-based random stream keyed by (master_seed, stream_id, block counter).
///
/// Distinct stream ids give independent sequences; copying a stream and
/// continuing from the copy reproduces the original exactly, which is what
/// horizon extension relies on.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t first_block = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal by the ziggurat method (exact, 128 layers).
  double normal() noexcept;
  /// Exponential with unit mean.
  double exponential() noexcept;

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return id_; }
  /// Next Philox block to be generated (blocks are drawn eight at a time).
  std::uint64_t block() const noexcept { return block_; }
  RngProvenance provenance() const noexcept { return {seed_, id_, first_block_}; }

 private:
  static constexpr int kBlocks = 8;
  static constexpr int kBuffer = 4 * kBlocks;
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t id_;
  std::uint64_t first_block_;
  std::uint64_t block_;
  std::array<std::uint32_t, kBuffer> buffer_{};
  int used_ = kBuffer;
};

}  // namespace kfp
