// Copyright 2026 The surfdice Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Counter-based random numbers.
//
// Every draw is a pure function of (seed, stream, counter): the counter is
// mixed with the seed through SplitMix64 finalizers. Results do not depend
// on evaluation order or thread split, and the integer stream is identical on
// every platform. Gaussian draws use Box-Muller on two consecutive counters.

#ifndef SURFDICE_RANDOM_HPP
#define SURFDICE_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace surfdice {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream,
                                            std::uint64_t counter) {
  return splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ counter);
}

/// Uniform in the open interval (0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t bits = counter_bits(seed, stream, counter) >> 11;  // 53 bits
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw number `counter` of the stream.
inline double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const double u1 = counter_uniform(seed, stream, 2 * counter);
  const double u2 = counter_uniform(seed, stream, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Stream ids used by the augmentation pipeline.
namespace streams {
inline constexpr std::uint64_t kAffine = 1;
inline constexpr std::uint64_t kMirror = 2;
inline constexpr std::uint64_t kElasticX = 3;
inline constexpr std::uint64_t kElasticY = 4;
inline constexpr std::uint64_t kNoise = 5;
}  // namespace streams

}  // namespace surfdice

#endif  // SURFDICE_RANDOM_HPP
