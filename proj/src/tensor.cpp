#include "geoflow/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geoflow/error.hpp"

namespace geoflow {

Tensor::Tensor(int dim, std::vector<Variance> slots) : dim_(dim), slots_(std::move(slots)) {
  if (dim < 1 || dim > 17) throw TypeError("tensor dimension out of range: " + std::to_string(dim));
  std::size_t size = 1;
  for (std::size_t k = 0; k < slots_.size(); ++k) size *= static_cast<std::size_t>(dim);
  data_.assign(size, 0.0);
}

std::size_t Tensor::offset(std::initializer_list<int> idx) const {
  return offset(std::span<const int>(idx.begin(), idx.size()));
}

std::size_t Tensor::offset(std::span<const int> idx) const {
  if (idx.size() != slots_.size())
    throw TypeError("tensor of rank " + std::to_string(slots_.size()) + " indexed with " +
                    std::to_string(idx.size()) + " indices");
  std::size_t off = 0;
  for (int i : idx) {
    if (i < 0 || i >= dim_) throw TypeError("tensor index out of range");
    off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  }
  return off;
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Tensor vector_tensor(std::span<const double> components, Variance v) {
  Tensor t(static_cast<int>(components.size()), {v});
  std::copy(components.begin(), components.end(), t.data().begin());
  return t;
}

Tensor contract(const Tensor& a, const Tensor& b, int slot_a, int slot_b) {
  if (a.dim() != b.dim()) throw TypeError("contraction between tensors of different dimension");
  if (slot_a < 0 || slot_a >= a.rank() || slot_b < 0 || slot_b >= b.rank())
    throw TypeError("contraction slot out of range");
  if (a.variances()[static_cast<std::size_t>(slot_a)] == b.variances()[static_cast<std::size_t>(slot_b)])
    throw TypeError("contraction requires one covariant and one contravariant slot");

  std::vector<Variance> slots;
  for (int k = 0; k < a.rank(); ++k)
    if (k != slot_a) slots.push_back(a.variances()[static_cast<std::size_t>(k)]);
  for (int k = 0; k < b.rank(); ++k)
    if (k != slot_b) slots.push_back(b.variances()[static_cast<std::size_t>(k)]);

  const int dim = a.dim();
  const int ra = a.rank() - 1;
  const int rb = b.rank() - 1;
  Tensor out = slots.empty() ? Tensor(dim, {}) : Tensor(dim, slots);

  std::vector<int> free(static_cast<std::size_t>(ra + rb), 0);
  std::vector<int> ia(static_cast<std::size_t>(a.rank()));
  std::vector<int> ib(static_cast<std::size_t>(b.rank()));
  std::size_t flat = 0;
  for (;;) {
    for (int k = 0, f = 0; k < a.rank(); ++k)
      if (k != slot_a) ia[static_cast<std::size_t>(k)] = free[static_cast<std::size_t>(f++)];
    for (int k = 0, f = ra; k < b.rank(); ++k)
      if (k != slot_b) ib[static_cast<std::size_t>(k)] = free[static_cast<std::size_t>(f++)];
    double sum = 0.0;
    for (int c = 0; c < dim; ++c) {
      ia[static_cast<std::size_t>(slot_a)] = c;
      ib[static_cast<std::size_t>(slot_b)] = c;
      sum += a.at(ia) * b.at(ib);
    }
    out.data()[flat++] = sum;

    int k = ra + rb - 1;
    while (k >= 0 && ++free[static_cast<std::size_t>(k)] == dim) free[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  return out;
}

}  // namespace geoflow
