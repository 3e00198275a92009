#pragma once

#include <cstdint>

namespace htrpm {

// Counter-based splittable random stream. A stream is fully described by a
// 64-bit key and a draw counter, so it serializes to two integers and resumes
// bit-identically. Splitting derives an independent child key from the parent
// key and a split index; the child's draws never depend on the parent's
// counter position.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(derive(seed, 0x8f5c'1c79'02e3'9d21ULL)) {}

  RngStream split(std::uint64_t index) const {
    RngStream child(0);
    child.key_ = derive(key_, 0x9e6c'63d0'876a'3f6bULL + index);
    child.ctr_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return mix(key_ + 0x9e37'79b9'7f4a'7c15ULL * ++ctr_); }

  // Uniform on the open interval (0,1); safe to pass to log().
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential();
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return ctr_; }

  static RngStream restore(std::uint64_t key, std::uint64_t counter) {
    RngStream s(0);
    s.key_ = key;
    s.ctr_ = counter;
    return s;
  }

 private:
  // murmur3-style finalizer
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51'afd7'ed55'8ccdULL;
    x ^= x >> 33;
    x *= 0xc4ce'b9fe'1a85'ec53ULL;
    x ^= x >> 33;
    return x;
  }

  static std::uint64_t derive(std::uint64_t base, std::uint64_t salt) {
    return mix(mix(base + salt) + salt);
  }

  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
};

}  // namespace htrpm
