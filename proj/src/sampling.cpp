#include "kfield/sampling.hpp"

#include "kfield/errors.hpp"

namespace kfield {

SampleBox SampleBox::cube(int d, double lo, double hi) {
  SampleBox b;
  b.lo.assign(static_cast<std::size_t>(d), lo);
  b.hi.assign(static_cast<std::size_t>(d), hi);
  return b;
}

double halton(unsigned index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

namespace {

std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> ps;
  for (unsigned c = 2; ps.size() < count; ++c) {
    bool prime = true;
    for (unsigned p : ps) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) ps.push_back(c);
  }
  return ps;
}

}  // namespace

std::vector<std::vector<double>> halton_points(const SampleBox& box, int count) {
  if (box.lo.size() != box.hi.size()) throw DimensionMismatch("sample box bounds differ in length");
  auto primes = first_primes(box.lo.size());
  std::vector<std::vector<double>> pts;
  for (int s = 1; s <= count; ++s) {
    std::vector<double> p(box.lo.size());
    for (std::size_t d = 0; d < p.size(); ++d)
      p[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * halton(static_cast<unsigned>(s), primes[d]);
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace kfield
