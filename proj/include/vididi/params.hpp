#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vididi/rng.hpp"

namespace vididi {

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
  /// 1 for vectors stored as (n×1), 2 for matrices.
  int rank = 2;
};

/// Ordered collection of named parameter tensors. Every mutable access
/// bumps `version()`, which lets activation tapes detect staleness.
class ParamSet {
 public:
  void add(std::string name, Eigen::Index rows, Eigen::Index cols, int rank);

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  const Eigen::MatrixXd& get(const std::string& name) const;
  Eigen::MatrixXd& mut(const std::string& name);

  std::size_t size() const { return tensors_.size(); }
  const std::vector<NamedTensor>& tensors() const { return tensors_; }
  NamedTensor& tensor_at(std::size_t i);
  const NamedTensor& tensor_at(std::size_t i) const { return tensors_.at(i); }

  std::uint64_t version() const { return version_; }
  std::size_t parameter_count() const;

  /// Same names and shapes, all values zero.
  ParamSet zeros_like() const;
  bool same_layout(const ParamSet& other) const;

  void set_zero();
  /// this += scale * other (layouts must match).
  void axpy(double scale, const ParamSet& other);
  /// Flattened copy of every value in tensor order.
  Eigen::VectorXd flatten() const;
  double max_abs_diff(const ParamSet& other) const;

  friend bool operator==(const ParamSet& a, const ParamSet& b);

 private:
  std::vector<NamedTensor> tensors_;
  std::map<std::string, std::size_t> index_;
  std::uint64_t version_ = 0;
};

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per tensor, where fan_in is
/// supplied per name, keyed deterministically by (seed, name).
void init_uniform_fan_in(ParamSet& params, const std::map<std::string, Eigen::Index>& fan_in,
                         std::uint64_t seed);

}  // namespace vididi
