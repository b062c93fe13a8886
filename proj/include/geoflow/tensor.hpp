#pragma once

#include <initializer_list>
#include <span>
#include <vector>

namespace geoflow {

enum class Variance { Covariant, Contravariant };

/// Dense tensor over indices {0..dim-1} with per-slot variance.
///
/// Component storage is row-major with the first slot slowest.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, std::vector<Variance> slots);

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(slots_.size()); }
  const std::vector<Variance>& variances() const { return slots_; }

  template <class... I>
  double& operator()(I... idx) {
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <class... I>
  double operator()(I... idx) const {
    return data_[offset({static_cast<int>(idx)...})];
  }

  double& at(std::span<const int> idx) { return data_[offset(idx)]; }
  double at(std::span<const int> idx) const { return data_[offset(idx)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double max_abs() const;

 private:
  std::size_t offset(std::initializer_list<int> idx) const;
  std::size_t offset(std::span<const int> idx) const;

  int dim_ = 0;
  std::vector<Variance> slots_;
  std::vector<double> data_;
};

Tensor vector_tensor(std::span<const double> components, Variance v = Variance::Contravariant);

/// Contracts slot `slot_a` of `a` against slot `slot_b` of `b`. The result
/// carries a's remaining slots followed by b's. Throws TypeError unless the
/// two slots have opposite variance and the dimensions agree.
Tensor contract(const Tensor& a, const Tensor& b, int slot_a, int slot_b);

}  // namespace geoflow
