#include "nmzkit/sampling.hpp"

#include <cmath>
#include <random>

#include "nmzkit/errors.hpp"

namespace nmzkit::haar {

int group_dim(Group g) { return g == Group::SU2 ? 2 : 3; }

std::string group_name(Group g) { return g == Group::SU2 ? "SU2" : "SO3"; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<double, 4> GroupSampler::quaternion(std::uint64_t i) const {
  std::mt19937_64 eng(splitmix64(splitmix64(seed_ ^ splitmix64(stream_)) + i));
  std::normal_distribution<double> normal;
  for (;;) {
    std::array<double, 4> q{normal(eng), normal(eng), normal(eng), normal(eng)};
    double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (n < 1e-12) continue;
    for (auto& v : q) v /= n;
    return q;
  }
}

MatrixC su2_from_quaternion(const std::array<double, 4>& q) {
  const auto [a, b, c, d] = q;
  MatrixC u(2, 2);
  u << cplx(a, b), cplx(c, d), cplx(-c, d), cplx(a, -b);
  return u;
}

MatrixC so3_from_quaternion(const std::array<double, 4>& q) {
  const auto [w, x, y, z] = q;
  MatrixC o(3, 3);
  o << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
      2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
      2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return o;
}

MatrixC GroupSampler::sample(std::uint64_t i) const {
  auto q = quaternion(i);
  return group_ == Group::SU2 ? su2_from_quaternion(q) : so3_from_quaternion(q);
}

MatrixC sample_su2(const GroupSampler& s, std::uint64_t i) {
  if (s.group() != Group::SU2) throw DimMismatch("sample_su2: sampler is not SU2");
  return s.sample(i);
}

MatrixC sample_so3(const GroupSampler& s, std::uint64_t i) {
  if (s.group() != Group::SO3) throw DimMismatch("sample_so3: sampler is not SO3");
  return s.sample(i);
}

}  // namespace nmzkit::haar
