#include "tnl/sobol.hpp"

#include <bit>
#include <stdexcept>

namespace tnl {

namespace {

// Direction-number table (Joe & Kuo style): primitive polynomial degree s,
// polynomial coefficient bits a, and initial odd values m_1..m_s with
// m_j < 2^j. Dimension 1 is the van der Corput sequence in base 2.
struct DirectionSpec {
  unsigned s;
  std::uint32_t a;
  std::uint32_t m[8];
};

constexpr DirectionSpec kSpecs[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 3, 25, 9}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
};

constexpr unsigned kMaxDimension = 1 + sizeof(kSpecs) / sizeof(kSpecs[0]);

void fill_directions(unsigned dim, std::uint64_t* v) {
  if (dim == 0) {
    for (unsigned j = 0; j < 64; ++j) v[j] = 1ull << (63 - j);
    return;
  }
  const DirectionSpec& spec = kSpecs[dim - 1];
  const unsigned s = spec.s;
  std::uint64_t m[64];
  for (unsigned j = 0; j < s; ++j) m[j] = spec.m[j];
  for (unsigned j = s; j < 64; ++j) {
    std::uint64_t val = m[j - s] ^ (m[j - s] << s);
    for (unsigned k = 1; k < s; ++k) {
      if ((spec.a >> (s - 1 - k)) & 1u) val ^= m[j - k] << k;
    }
    m[j] = val;
  }
  for (unsigned j = 0; j < 64; ++j) v[j] = m[j] << (63 - j);
}

}  // namespace

unsigned SobolSequence::max_dimension() { return kMaxDimension; }

SobolSequence::SobolSequence(unsigned dimension) : dimension_(dimension) {
  if (dimension == 0 || dimension > kMaxDimension) {
    throw std::invalid_argument("sobol dimension must be in [1, " +
                                std::to_string(kMaxDimension) + "]");
  }
  state_.assign(dimension, 0);
  directions_.resize(static_cast<std::size_t>(dimension) * 64);
  for (unsigned d = 0; d < dimension; ++d) fill_directions(d, directions_.data() + d * 64);
}

void SobolSequence::seek(std::uint64_t index) {
  index_ = index;
  const std::uint64_t gray = index ^ (index >> 1);
  for (unsigned d = 0; d < dimension_; ++d) {
    std::uint64_t x = 0;
    const std::uint64_t* v = directions_.data() + static_cast<std::size_t>(d) * 64;
    for (unsigned j = 0; j < 64; ++j) {
      if ((gray >> j) & 1ull) x ^= v[j];
    }
    state_[d] = x;
  }
}

void SobolSequence::next(std::span<double> out) {
  for (unsigned d = 0; d < dimension_; ++d) {
    out[d] = static_cast<double>(state_[d] >> 11) * 0x1.0p-53;
  }
  const unsigned flip = static_cast<unsigned>(std::countr_one(index_));
  ++index_;
  for (unsigned d = 0; d < dimension_; ++d) {
    state_[d] ^= directions_[static_cast<std::size_t>(d) * 64 + flip];
  }
}

}  // namespace tnl
