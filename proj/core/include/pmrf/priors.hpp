#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmrf/matrix.hpp"

namespace pmrf {

// Sparse n x F feature matrix, CSR.
struct FeatureMatrix {
  int n = 0;
  int f = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<int> idx;
  std::vector<double> val;
};

// Centered per-node priors: Q = q~ - 1/C. Rows sum to zero.
struct PriorMatrix {
  Mat Q;
  int C = 0;
};

struct LogRegModel {
  Mat weights;               // F x C
  std::vector<double> bias;  // C
};

struct LogRegConfig {
  int iterations = 500;
  double step = 0.1;
  double l2 = 1e-3;  // weight penalty, bias unpenalized
};

// Optional preprocessing: each feature row scaled to unit L1 norm (zero rows
// untouched). Apply before both fitting and prediction.
FeatureMatrix l1_normalized(const FeatureMatrix& X);

struct LogRegFit {
  LogRegModel model;
  std::vector<double> loss_history;  // loss before each accepted step, then final
  std::vector<std::string> warnings;
};

// Full-batch gradient descent from zero init on mean softmax cross-entropy
// plus (l2/2)*||weights||^2. If a fixed step would increase the loss the step
// is halved and retried (documented line-search fallback), so the recorded
// loss history is non-increasing. Deterministic.
LogRegFit fit_logreg(const FeatureMatrix& X, const std::vector<int>& labels,
                     const std::vector<int>& train, int C,
                     const LogRegConfig& cfg = {});

// Mean cross-entropy over train plus the L2 term, and its gradient. Exposed
// for gradient checking.
double logreg_loss(const LogRegModel& m, const FeatureMatrix& X,
                   const std::vector<int>& labels, const std::vector<int>& train,
                   double l2);
void logreg_loss_grad(const LogRegModel& m, const FeatureMatrix& X,
                      const std::vector<int>& labels, const std::vector<int>& train,
                      double l2, double* loss, LogRegModel* grad);

// softmax(x_v * weights + bias) - 1/C per row.
PriorMatrix predict_priors(const LogRegModel& m, const FeatureMatrix& X);

// Featureless assignment: train nodes get their one-hot label, everyone else
// the uniform distribution; returned centered.
PriorMatrix label_priors(const std::vector<int>& labels, const std::vector<int>& train,
                         int n, int C);

}  // namespace pmrf
