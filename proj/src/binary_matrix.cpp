#include "sbmvi/binary_matrix.hpp"

#include <algorithm>

#include "sbmvi/error.hpp"

namespace sbmvi {

BinaryMatrix BinaryMatrix::from_entries(std::size_t rows, std::size_t cols,
                                        std::vector<Entry> entries,
                                        Storage storage) {
  for (const auto& [i, j] : entries)
    require(i < rows && j < cols, ErrorCode::InvalidInput,
            "matrix entry out of range");
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  BinaryMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.nnz_ = entries.size();
  m.storage_ = storage;
  if (storage == Storage::Dense) {
    m.dense_.assign(rows * cols, 0);
    for (const auto& [i, j] : entries) m.dense_[std::size_t{i} * cols + j] = 1;
  }
  // Row index lists back products and row scans in both storages.
  m.offsets_.assign(rows + 1, 0);
  for (const auto& e : entries) ++m.offsets_[e.first + 1];
  for (std::size_t i = 0; i < rows; ++i) m.offsets_[i + 1] += m.offsets_[i];
  m.indices_.reserve(entries.size());
  for (const auto& e : entries) m.indices_.push_back(e.second);
  return m;
}

bool BinaryMatrix::at(std::size_t i, std::size_t j) const noexcept {
  if (storage_ == Storage::Dense) return dense_[i * cols_ + j] != 0;
  const auto first = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  const auto last = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  return std::binary_search(first, last, static_cast<Index>(j));
}

std::size_t BinaryMatrix::row_nnz(std::size_t i) const noexcept {
  return offsets_[i + 1] - offsets_[i];
}

void BinaryMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  require(x.size() == cols_ && y.size() == rows_, ErrorCode::InvalidInput,
          "matrix-vector dimension mismatch");
  for (std::size_t i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += x[indices_[k]];
    y[i] = acc;
  }
}

std::vector<Entry> BinaryMatrix::entries() const {
  std::vector<Entry> out;
  out.reserve(nnz_);
  for (std::size_t i = 0; i < rows_; ++i)
    for_each_in_row(i, [&](Index j) { out.emplace_back(static_cast<Index>(i), j); });
  return out;
}

BinaryMatrix BinaryMatrix::transposed() const {
  auto e = entries();
  for (auto& [i, j] : e) std::swap(i, j);
  return from_entries(cols_, rows_, std::move(e), storage_);
}

BinaryMatrix BinaryMatrix::with_storage(Storage storage) const {
  if (storage == storage_) return *this;
  return from_entries(rows_, cols_, entries(), storage);
}

bool operator==(const BinaryMatrix& a, const BinaryMatrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries() == b.entries();
}

}  // namespace sbmvi
