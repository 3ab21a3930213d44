#include "vididi/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vididi {

namespace {

void check_pair(const EmbeddingBatch& a, const EmbeddingBatch& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(who) + ": embedding batches differ in shape");
  }
  if (a.rows() == 0 || a.cols() == 0) {
    throw std::invalid_argument(std::string(who) + ": empty embedding batch");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": non-finite embedding values");
  }
}

Eigen::VectorXd row_norms(const EmbeddingBatch& z, const char* who) {
  Eigen::VectorXd n = z.rowwise().norm();
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (!(n(i) > 0.0)) {
      throw std::invalid_argument(std::string(who) + ": zero-norm row " + std::to_string(i));
    }
  }
  return n;
}

// Gradient w.r.t. z of a function of z/|z|, given the gradient w.r.t. the
// normalized rows.
EmbeddingBatch through_normalization(const EmbeddingBatch& unit, const Eigen::VectorXd& norms,
                                     const EmbeddingBatch& grad_unit) {
  EmbeddingBatch g(unit.rows(), unit.cols());
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const double proj = unit.row(i).dot(grad_unit.row(i));
    g.row(i) = (grad_unit.row(i) - proj * unit.row(i)) / norms(i);
  }
  return g;
}

}  // namespace

Eigen::MatrixXd cosine_similarity_matrix(const EmbeddingBatch& za, const EmbeddingBatch& zb) {
  if (za.cols() != zb.cols()) {
    throw std::invalid_argument("cosine_similarity_matrix: embedding dims differ");
  }
  const Eigen::VectorXd na = row_norms(za, "cosine_similarity_matrix");
  const Eigen::VectorXd nb = row_norms(zb, "cosine_similarity_matrix");
  const EmbeddingBatch ua = na.asDiagonal().inverse() * za;
  const EmbeddingBatch ub = nb.asDiagonal().inverse() * zb;
  return ua * ub.transpose();
}

LossReport infonce_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("infonce_loss: temperature must be > 0");
  check_pair(za, zb, "infonce_loss");
  const Eigen::Index B = za.rows();
  if (B < 2) throw std::invalid_argument("infonce_loss: batch size must be >= 2");

  const Eigen::VectorXd na = row_norms(za, "infonce_loss");
  const Eigen::VectorXd nb = row_norms(zb, "infonce_loss");
  const EmbeddingBatch ua = na.asDiagonal().inverse() * za;
  const EmbeddingBatch ub = nb.asDiagonal().inverse() * zb;
  const Eigen::MatrixXd logits = (ua * ub.transpose()) / alpha;

  // Row softmax P (over j) and column softmax Q (over i), both stabilized.
  Eigen::MatrixXd P(B, B), Q(B, B);
  double row_term = 0.0;
  double col_term = 0.0;
  for (Eigen::Index i = 0; i < B; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    const double sum = e.sum();
    P.row(i) = e / sum;
    row_term -= logits(i, i) - m - std::log(sum);
  }
  for (Eigen::Index j = 0; j < B; ++j) {
    const double m = logits.col(j).maxCoeff();
    const Eigen::VectorXd e = (logits.col(j).array() - m).exp().matrix();
    const double sum = e.sum();
    Q.col(j) = e / sum;
    col_term -= logits(j, j) - m - std::log(sum);
  }
  const double scale = 1.0 / (2.0 * static_cast<double>(B));
  row_term *= scale;
  col_term *= scale;

  // dL/ds_ij = (P_ij + Q_ij - 2 delta_ij) / (2 B alpha)
  Eigen::MatrixXd G = P + Q;
  G.diagonal().array() -= 2.0;
  G *= scale / alpha;

  LossReport r;
  r.total = row_term + col_term;
  r.terms = {{"row_term", row_term}, {"col_term", col_term}};
  r.grad_a = through_normalization(ua, na, G * ub);
  r.grad_b = through_normalization(ub, nb, G.transpose() * ua);
  return r;
}

LossReport byol_loss(const EmbeddingBatch& online_pred, const EmbeddingBatch& target_proj) {
  check_pair(online_pred, target_proj, "byol_loss");
  const Eigen::Index B = online_pred.rows();
  const Eigen::VectorXd na = row_norms(online_pred, "byol_loss");
  const Eigen::VectorXd nb = row_norms(target_proj, "byol_loss");
  const EmbeddingBatch ua = na.asDiagonal().inverse() * online_pred;
  const EmbeddingBatch ub = nb.asDiagonal().inverse() * target_proj;

  double total = 0.0;
  for (Eigen::Index i = 0; i < B; ++i) total += 2.0 - 2.0 * ua.row(i).dot(ub.row(i));
  const double scale = 1.0 / (2.0 * static_cast<double>(B));
  total *= scale;

  LossReport r;
  r.total = total;
  r.terms = {{"alignment", total}};
  r.grad_a = through_normalization(ua, na, (-2.0 * scale) * ub);
  r.grad_b = EmbeddingBatch::Zero(B, online_pred.cols());
  return r;
}

namespace {

struct VicStats {
  double variance = 0.0;
  double covariance = 0.0;
  EmbeddingBatch grad_variance;
  EmbeddingBatch grad_covariance;
};

VicStats variance_covariance(const EmbeddingBatch& z, double gamma, double eps) {
  const auto B = static_cast<double>(z.rows());
  const auto D = static_cast<double>(z.cols());
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const EmbeddingBatch centered = z.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / (B - 1.0);

  VicStats st;
  st.grad_variance = EmbeddingBatch::Zero(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double std_reg = std::sqrt(cov(j, j) + eps);
    const double hinge = gamma - std_reg;
    if (hinge > 0.0) {
      st.variance += hinge;
      st.grad_variance.col(j) = -centered.col(j) / (D * std_reg * (B - 1.0));
    }
  }
  st.variance /= D;

  Eigen::MatrixXd off = cov;
  off.diagonal().setZero();
  st.covariance = off.squaredNorm() / D;
  // Centering needs no correction: columns of `centered` sum to zero.
  st.grad_covariance = centered * off * (4.0 / (D * (B - 1.0)));
  return st;
}

}  // namespace

LossReport vicreg_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                       const VicRegWeights& w) {
  check_pair(za, zb, "vicreg_loss");
  const Eigen::Index B = za.rows();
  if (B < 2) throw std::invalid_argument("vicreg_loss: batch size must be >= 2");

  const EmbeddingBatch diff = za - zb;
  const double invariance = diff.squaredNorm() / static_cast<double>(B);
  const VicStats a = variance_covariance(za, w.gamma, w.eps);
  const VicStats b = variance_covariance(zb, w.gamma, w.eps);

  LossReport r;
  r.terms = {{"invariance", invariance},
             {"variance", a.variance + b.variance},
             {"covariance", a.covariance + b.covariance}};
  r.total = w.lambda * invariance + w.mu * (a.variance + b.variance) +
            w.nu * (a.covariance + b.covariance);
  const EmbeddingBatch g_inv = diff * (2.0 * w.lambda / static_cast<double>(B));
  r.grad_a = g_inv + w.mu * a.grad_variance + w.nu * a.grad_covariance;
  r.grad_b = -g_inv + w.mu * b.grad_variance + w.nu * b.grad_covariance;
  return r;
}

}  // namespace vididi
