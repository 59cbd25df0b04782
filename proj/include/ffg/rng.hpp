#pragma once

// Counter-based random generator (Philox4x32-10) with explicit stream ids.
// Every stochastic routine in the library receives an Rng; streams are
// derived from a (seed, stream) pair so identical configs replay bit-exact
// regardless of thread count or call interleaving. Clan construction uses
// one stream per cylinder id, which lets the coupled experiments replay the
// same free process and flags across models.

#include <array>
#include <cmath>
#include <cstdint>

namespace ffg {

class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    block_[0] = 0;
    block_[1] = 0;
    block_[2] = static_cast<std::uint32_t>(stream);
    block_[3] = static_cast<std::uint32_t>(stream >> 32);
    pos_ = 4;
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return out_[pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // uniform in [0,1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0,1], safe for log()
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential() { return -std::log(uniform_pos()); }

  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Knuth product method; exact splitting keeps the loop short for big means.
  std::uint64_t poisson(double mean) {
    if (mean <= 0) return 0;
    if (mean > 30.0) return poisson(mean / 2) + poisson(mean / 2);
    const double limit = std::exp(-mean);
    std::uint64_t n = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++n;
      prod *= uniform_pos();
    }
    return n;
  }

  std::uint64_t below(std::uint64_t bound) {  // uniform in [0, bound)
    // rejection to avoid modulo bias
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1; mask |= mask >> 2; mask |= mask >> 4;
    mask |= mask >> 8; mask |= mask >> 16; mask |= mask >> 32;
    std::uint64_t v;
    do { v = next_u64() & mask; } while (v >= bound);
    return v;
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
  }

  void refill() {
    std::array<std::uint32_t, 4> c = block_;
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint32_t lo0 = 0xD2511F53u * c[0];
      std::uint32_t hi0 = mulhi(0xD2511F53u, c[0]);
      std::uint32_t lo1 = 0xCD9E8D57u * c[2];
      std::uint32_t hi1 = mulhi(0xCD9E8D57u, c[2]);
      c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_ = c;
    pos_ = 0;
    if (++block_[0] == 0) ++block_[1];  // 64-bit draw counter within the stream
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> block_;
  std::array<std::uint32_t, 4> out_;
  int pos_;
};

// Stream-id layout used throughout: the high 32 bits identify a replica (or
// another top-level unit of work), the low 32 bits a purpose/cylinder within
// it. Distinct ids give disjoint Philox counter blocks.
inline std::uint64_t stream_id(std::uint32_t replica, std::uint32_t sub) {
  return (static_cast<std::uint64_t>(replica) << 32) | sub;
}

}  // namespace ffg
