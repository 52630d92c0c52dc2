#pragma once

#include <cstddef>
#include <vector>

namespace m2spec {

/// Lattice index into Z^d.
using MultiIndex = std::vector<int>;

/// Finite symmetric set of lattice indices: contains the all-zero index,
/// is closed under negation, has no duplicates (hence odd cardinality).
/// The order of construction is preserved and defines the storage layout
/// of every coefficient set aligned with this index set.
class IndexSet {
 public:
  IndexSet(int dim, std::vector<MultiIndex> indices);

  /// Full box {-max_index..max_index}^d in lexicographic order.
  static IndexSet box(int dim, int max_index);

  int dim() const { return dim_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t pos) const { return indices_[pos]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  /// Position of a given index; throws IndexError if absent.
  std::size_t position(const MultiIndex& k) const;
  bool contains(const MultiIndex& k) const;

  /// Position of -k for the index stored at `pos`.
  std::size_t negation_position(std::size_t pos) const { return neg_pos_[pos]; }
  std::size_t zero_position() const { return zero_pos_; }

  /// Positions of the half set: indices whose first nonzero component is
  /// positive. Together with their negations and the zero index they cover
  /// the whole set.
  const std::vector<std::size_t>& half_positions() const { return half_pos_; }

  /// max over k in the set and axes j of |k_j|.
  int max_abs_component() const { return max_abs_; }

  bool operator==(const IndexSet& other) const {
    return dim_ == other.dim_ && indices_ == other.indices_;
  }

 private:
  int dim_;
  std::vector<MultiIndex> indices_;
  std::vector<std::size_t> neg_pos_;
  std::vector<std::size_t> half_pos_;
  std::size_t zero_pos_ = 0;
  int max_abs_ = 0;
};

}  // namespace m2spec
