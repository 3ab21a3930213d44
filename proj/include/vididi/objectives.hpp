#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>

namespace vididi {

/// B×D matrix, one embedding per row.
using EmbeddingBatch = Eigen::MatrixXd;

struct LossReport {
  double total = 0.0;
  std::map<std::string, double> terms;
  EmbeddingBatch grad_a;
  EmbeddingBatch grad_b;
};

/// s[i][j] = cos(za_i, zb_j). Throws on zero-norm rows or dim mismatch.
Eigen::MatrixXd cosine_similarity_matrix(const EmbeddingBatch& za, const EmbeddingBatch& zb);

/// Symmetric NT-Xent: mean negative log-softmax of the diagonal over rows
/// and over columns of s/alpha, each weighted 1/(2B).
LossReport infonce_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb, double alpha);

/// (1/2B) sum_i (2 - 2 cos(p_i, t_i)). `target_proj` is stop-gradient, so
/// grad_b is always zero.
LossReport byol_loss(const EmbeddingBatch& online_pred, const EmbeddingBatch& target_proj);

struct VicRegWeights {
  double lambda = 1.0;  // invariance
  double mu = 1.0;      // variance
  double nu = 0.05;     // covariance
  double gamma = 1.0;   // std target
  double eps = 1e-4;

  friend bool operator==(const VicRegWeights&, const VicRegWeights&) = default;
};

/// Invariance + variance hinge + off-diagonal covariance penalty. Variance
/// and covariance use the unbiased (B-1) denominator.
LossReport vicreg_loss(const EmbeddingBatch& za, const EmbeddingBatch& zb,
                       const VicRegWeights& w = {});

}  // namespace vididi
