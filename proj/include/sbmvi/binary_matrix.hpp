#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sbmvi {

enum class Storage { Dense, Sparse };

using Index = std::uint32_t;
using Entry = std::pair<Index, Index>;

// A rows x cols 0/1 matrix. Both storages keep compressed-sparse-row index
// lists (sorted within each row) for products and row scans; the dense
// storage adds a byte array for constant-time lookup.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;

  /// Duplicate entries are collapsed.
  static BinaryMatrix from_entries(std::size_t rows, std::size_t cols,
                                   std::vector<Entry> entries, Storage storage);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Storage storage() const noexcept { return storage_; }
  std::size_t nnz() const noexcept { return nnz_; }

  bool at(std::size_t i, std::size_t j) const noexcept;
  std::size_t row_nnz(std::size_t i) const noexcept;

  /// y = M x.
  void multiply(std::span<const double> x, std::span<double> y) const;

  template <class F>
  void for_each_in_row(std::size_t i, F&& f) const {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) f(indices_[k]);
  }

  std::vector<Entry> entries() const;
  BinaryMatrix transposed() const;
  BinaryMatrix with_storage(Storage storage) const;

  friend bool operator==(const BinaryMatrix& a, const BinaryMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t nnz_ = 0;
  Storage storage_ = Storage::Dense;
  std::vector<std::uint8_t> dense_;
  std::vector<std::size_t> offsets_;
  std::vector<Index> indices_;
};

}  // namespace sbmvi
