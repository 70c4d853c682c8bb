#ifndef LOADER_RL_RNG_HPP_
#define LOADER_RL_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace loader_rl {

// 64-bit FNV-1a; used for config digests and seed derivation.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

std::uint64_t splitmix64(std::uint64_t x);

// Seed for the named sub-stream of a run seed ("env", "policy-init", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

// Seedable generator with stdlib-independent distributions, so streams are
// reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::string_view name) {
    return Rng(derive_seed(seed, name));
  }

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1) with 53 random bits
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; consumes two draws per call
  double normal();

  // uniform integer on [0, n), n > 0
  std::size_t below(std::size_t n);

  std::string serialize() const;
  void deserialize(const std::string& text);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace loader_rl

#endif  // LOADER_RL_RNG_HPP_
