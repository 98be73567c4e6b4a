#pragma once

// Site-wise instruction stacks for Activated Random Walk.
//
// Every site x of Z carries an infinite stack of instructions. The k-th
// instruction at x is a pure function of (seed, lambda, x, k): stacks are
// generated by a counter-based mixer rather than a stateful stream, so any
// toppling order sees the same stacks and instructions can be addressed by
// index (midstream restarts).

#include <cstdint>
#include <map>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace arw {

using Site = std::int64_t;

enum class Instruction : std::uint8_t { Left, Right, Sleep };

std::string_view to_string(Instruction ins);

/// Sleep rate. lambda == 0 is allowed (particles never sleep).
struct Params {
  double lambda = 1.0;
};

/// Probability that a stack entry is a Sleep instruction: lambda / (1 + lambda).
double sleep_probability(const Params& params);

/// Identifier of the mixing function, recorded in run summaries.
inline constexpr std::string_view kMixerId = "arw-mix64-v1";

namespace mix {

/// splitmix64 finalizer.
constexpr std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t zigzag(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

/// Hash of (seed, site, index). Injective preprocessing of each argument
/// followed by chained finalizers.
constexpr std::uint64_t hash3(std::uint64_t seed, Site site, std::uint64_t index) {
  std::uint64_t h = fmix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = fmix64(h ^ (zigzag(site) * 0x9e3779b97f4a7c15ULL + 0x3c6ef372fe94f82bULL));
  h = fmix64(h ^ (index * 0xc2b2ae3d27d4eb4fULL + 0x165667b19e3779f9ULL));
  return h;
}

/// Derives an independent child seed, e.g. for trial t of an experiment.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return fmix64(fmix64(seed + 0x510e527fade682d1ULL) ^ fmix64(a * 0x9e3779b97f4a7c15ULL + 1) ^
                (b * 0xd1b54a32d192ed03ULL));
}

/// Maps 64 random bits to [0, 1) with 53-bit resolution.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace mix

/// Immutable source of instruction stacks; either i.i.d. random or a
/// hand-written table (for tests and fixtures).
class InstructionSource {
 public:
  struct Random {
    std::uint64_t master_seed = 0;
    Params params;
  };
  struct Scripted {
    std::map<std::pair<Site, std::uint64_t>, Instruction> table;
    Instruction fallback = Instruction::Sleep;
  };

  static InstructionSource random(std::uint64_t master_seed, Params params);
  static InstructionSource scripted(std::map<std::pair<Site, std::uint64_t>, Instruction> table,
                                    Instruction fallback);
  /// Convenience: per-site stacks listed from index 0.
  static InstructionSource scripted(const std::map<Site, std::vector<Instruction>>& stacks,
                                    Instruction fallback);

  Instruction at(Site site, std::uint64_t index) const {
    if (const auto* r = std::get_if<Random>(&impl_)) {
      const double u = mix::to_unit(mix::hash3(r->master_seed, site, index));
      if (u < sleep_p_) return Instruction::Sleep;
      return u < sleep_p_ + jump_half_ ? Instruction::Left : Instruction::Right;
    }
    return scripted_at(site, index);
  }

  bool is_random() const { return std::holds_alternative<Random>(impl_); }
  const std::variant<Random, Scripted>& variant() const { return impl_; }

 private:
  explicit InstructionSource(std::variant<Random, Scripted> impl);
  Instruction scripted_at(Site site, std::uint64_t index) const;

  std::variant<Random, Scripted> impl_;
  double sleep_p_ = 0.0;
  double jump_half_ = 0.5;
};

Instruction instruction_at(const InstructionSource& source, Site site, std::uint64_t index);

std::vector<Instruction> stack_prefix(const InstructionSource& source, Site site, std::size_t len);

}  // namespace arw
