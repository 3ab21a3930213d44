#include "vididi/params.hpp"

#include <cmath>
#include <stdexcept>

namespace vididi {

void ParamSet::add(std::string name, Eigen::Index rows, Eigen::Index cols, int rank) {
  if (contains(name)) throw std::invalid_argument("ParamSet: duplicate tensor '" + name + "'");
  index_.emplace(name, tensors_.size());
  tensors_.push_back({std::move(name), Eigen::MatrixXd::Zero(rows, cols), rank});
  ++version_;
}

const Eigen::MatrixXd& ParamSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamSet: no tensor '" + name + "'");
  return tensors_[it->second].value;
}

Eigen::MatrixXd& ParamSet::mut(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamSet: no tensor '" + name + "'");
  ++version_;
  return tensors_[it->second].value;
}

NamedTensor& ParamSet::tensor_at(std::size_t i) {
  ++version_;
  return tensors_.at(i);
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& t : tensors_) out.add(t.name, t.value.rows(), t.value.cols(), t.rank);
  return out;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto& a = tensors_[i];
    const auto& b = other.tensors_[i];
    if (a.name != b.name || a.rank != b.rank || a.value.rows() != b.value.rows() ||
        a.value.cols() != b.value.cols()) {
      return false;
    }
  }
  return true;
}

void ParamSet::set_zero() {
  ++version_;
  for (auto& t : tensors_) t.value.setZero();
}

void ParamSet::axpy(double scale, const ParamSet& other) {
  if (!same_layout(other)) throw std::invalid_argument("ParamSet::axpy: layout mismatch");
  ++version_;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    tensors_[i].value += scale * other.tensors_[i].value;
  }
}

Eigen::VectorXd ParamSet::flatten() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (const auto& t : tensors_) {
    out.segment(k, t.value.size()) = t.value.reshaped();
    k += t.value.size();
  }
  return out;
}

double ParamSet::max_abs_diff(const ParamSet& other) const {
  if (!same_layout(other)) throw std::invalid_argument("ParamSet::max_abs_diff: layout mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].value.size() == 0) continue;
    m = std::max(m, (tensors_[i].value - other.tensors_[i].value).cwiseAbs().maxCoeff());
  }
  return m;
}

bool operator==(const ParamSet& a, const ParamSet& b) {
  if (!a.same_layout(b)) return false;
  for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
    if (a.tensors_[i].value != b.tensors_[i].value) return false;
  }
  return true;
}

void init_uniform_fan_in(ParamSet& params, const std::map<std::string, Eigen::Index>& fan_in,
                         std::uint64_t seed) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    NamedTensor& t = params.tensor_at(i);
    auto it = fan_in.find(t.name);
    if (it == fan_in.end()) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(it->second));
    Rng rng(seed, {key_of("init"), key_of(t.name.c_str())});
    // Row-major fill order so the draw sequence is independent of storage.
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) t.value(r, c) = rng.uniform(-bound, bound);
    }
  }
}

}  // namespace vididi
