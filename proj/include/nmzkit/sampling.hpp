// Deterministic Haar sampling on SU(2) and SO(3).
#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "nmzkit/linalg.hpp"

namespace nmzkit::haar {

enum class Group { SU2, SO3 };

int group_dim(Group g);
std::string group_name(Group g);

// sample(i) depends only on (masterSeed, stream, i); any index range can be
// drawn in any order or shard without changing results.
class GroupSampler {
 public:
  GroupSampler(Group group, std::uint64_t masterSeed, std::uint64_t stream = 0)
      : group_(group), seed_(masterSeed), stream_(stream) {}

  Group group() const { return group_; }
  std::uint64_t master_seed() const { return seed_; }

  // Uniform point on S^3 as (a, b, c, d).
  std::array<double, 4> quaternion(std::uint64_t i) const;
  MatrixC sample(std::uint64_t i) const;

  // Independent sampler for a different purpose (conjugators vs. points, ...).
  GroupSampler substream(std::uint64_t s) const { return GroupSampler(group_, seed_, stream_ * 0x9E37u + s + 1); }

 private:
  Group group_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

MatrixC su2_from_quaternion(const std::array<double, 4>& q);
MatrixC so3_from_quaternion(const std::array<double, 4>& q);

MatrixC sample_su2(const GroupSampler& s, std::uint64_t i);
MatrixC sample_so3(const GroupSampler& s, std::uint64_t i);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace nmzkit::haar
