#include "m2spec/index_set.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

#include "m2spec/errors.hpp"

namespace m2spec {

namespace {

std::string format_index(const MultiIndex& k) {
  std::ostringstream os;
  os << "(";
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (j) os << ",";
    os << k[j];
  }
  os << ")";
  return os.str();
}

bool is_zero(const MultiIndex& k) {
  return std::all_of(k.begin(), k.end(), [](int c) { return c == 0; });
}

MultiIndex negate(const MultiIndex& k) {
  MultiIndex n(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) n[j] = -k[j];
  return n;
}

}  // namespace

IndexSet::IndexSet(int dim, std::vector<MultiIndex> indices)
    : dim_(dim), indices_(std::move(indices)) {
  if (dim_ < 1) throw DimensionError("index set: dimension must be >= 1");
  if (indices_.empty()) throw DataError("index set: empty");

  std::map<MultiIndex, std::size_t> lookup;
  for (std::size_t pos = 0; pos < indices_.size(); ++pos) {
    const MultiIndex& k = indices_[pos];
    if (static_cast<int>(k.size()) != dim_)
      throw DimensionError("index set: index " + format_index(k) +
                           " has wrong dimension");
    if (!lookup.emplace(k, pos).second)
      throw DataError("index set: duplicate index " + format_index(k));
    for (int c : k) max_abs_ = std::max(max_abs_, std::abs(c));
  }

  auto zero_it = lookup.find(MultiIndex(dim_, 0));
  if (zero_it == lookup.end())
    throw DataError("index set: missing the all-zero index");
  zero_pos_ = zero_it->second;

  neg_pos_.resize(indices_.size());
  for (std::size_t pos = 0; pos < indices_.size(); ++pos) {
    auto it = lookup.find(negate(indices_[pos]));
    if (it == lookup.end())
      throw DataError("index set: not closed under negation, missing -" +
                      format_index(indices_[pos]));
    neg_pos_[pos] = it->second;
  }

  if (indices_.size() % 2 == 0)
    throw DataError("index set: cardinality must be odd");

  for (std::size_t pos = 0; pos < indices_.size(); ++pos) {
    const MultiIndex& k = indices_[pos];
    if (is_zero(k)) continue;
    for (int c : k) {
      if (c > 0) {
        half_pos_.push_back(pos);
        break;
      }
      if (c < 0) break;
    }
  }
}

IndexSet IndexSet::box(int dim, int max_index) {
  if (dim < 1) throw DimensionError("index set: dimension must be >= 1");
  if (max_index < 0) throw DomainError("index set: max_index must be >= 0");
  const int span = 2 * max_index + 1;
  std::size_t count = 1;
  for (int j = 0; j < dim; ++j) count *= static_cast<std::size_t>(span);

  std::vector<MultiIndex> indices;
  indices.reserve(count);
  MultiIndex k(dim, -max_index);
  for (std::size_t i = 0; i < count; ++i) {
    indices.push_back(k);
    for (int j = dim - 1; j >= 0; --j) {
      if (k[j] < max_index) {
        ++k[j];
        break;
      }
      k[j] = -max_index;
    }
  }
  return IndexSet(dim, std::move(indices));
}

std::size_t IndexSet::position(const MultiIndex& k) const {
  auto it = std::find(indices_.begin(), indices_.end(), k);
  if (it == indices_.end())
    throw IndexError("index set: index " + format_index(k) + " not present");
  return static_cast<std::size_t>(it - indices_.begin());
}

bool IndexSet::contains(const MultiIndex& k) const {
  return std::find(indices_.begin(), indices_.end(), k) != indices_.end();
}

}  // namespace m2spec
