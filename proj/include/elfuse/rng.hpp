#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace elfuse {

/// Stream tags used when splitting a scenario seed into independent streams.
enum class StreamTag : std::uint64_t {
  PrimarySample = 0x1,
  SecondarySample = 0x2,
  Bootstrap = 0x3,
  BootstrapPrimary = 0x4,
  BootstrapSecondary = 0x5,
  NullDistribution = 0x6,
  Generic = 0x7,
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// xoshiro256** generator state. Value type: copying it forks the stream.
///
/// Independent streams are obtained by counter-based derivation: the 256-bit
/// state is a SplitMix64 expansion of a hash over (seed, key...). Two states
/// derived from equal keys produce bit-identical output on every platform.
class RngState {
 public:
  explicit RngState(std::uint64_t seed = 0) noexcept;

  static RngState derive(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> keys) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform01() noexcept;

  /// Uniform integer in [0, n). Lemire's nearly-divisionless rejection.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;

  /// Standard normal via the Box-Muller transform; the second variate of
  /// each pair is cached in the state.
  double standard_normal() noexcept;

  bool operator==(const RngState&) const = default;

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace elfuse
