#include "pmrf/priors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmrf/errors.hpp"
#include "pmrf/learner.hpp"

namespace pmrf {

namespace {

// logits_v = x_v * weights + bias
void node_logits(const FeatureMatrix& X, const LogRegModel& m, int v,
                 std::vector<double>& out) {
  const int C = static_cast<int>(m.bias.size());
  out.assign(m.bias.begin(), m.bias.end());
  for (auto i = X.row_ptr[v]; i < X.row_ptr[v + 1]; ++i) {
    const double xv = X.val[i];
    const int fidx = X.idx[i];
    for (int c = 0; c < C; ++c) out[c] += xv * m.weights(fidx, c);
  }
}

}  // namespace

FeatureMatrix l1_normalized(const FeatureMatrix& X) {
  FeatureMatrix out = X;
  for (int v = 0; v < X.n; ++v) {
    double norm = 0.0;
    for (auto i = X.row_ptr[v]; i < X.row_ptr[v + 1]; ++i) norm += std::abs(X.val[i]);
    if (norm == 0.0) continue;
    for (auto i = X.row_ptr[v]; i < X.row_ptr[v + 1]; ++i) out.val[i] /= norm;
  }
  return out;
}

void logreg_loss_grad(const LogRegModel& m, const FeatureMatrix& X,
                      const std::vector<int>& labels, const std::vector<int>& train,
                      double l2, double* loss, LogRegModel* grad) {
  const int C = static_cast<int>(m.bias.size());
  const double inv = 1.0 / static_cast<double>(train.size());

  if (grad) {
    grad->weights = Mat(m.weights.rows(), m.weights.cols());
    grad->bias.assign(C, 0.0);
  }
  double total = 0.0;
  std::vector<double> logits;
  for (int v : train) {
    node_logits(X, m, v, logits);
    const auto p = softmax_row(logits);
    const int y = labels[v];
    total -= std::log(std::max(p[y], 1e-300));
    if (grad) {
      for (int c = 0; c < C; ++c) {
        const double d = (p[c] - (c == y ? 1.0 : 0.0)) * inv;
        grad->bias[c] += d;
        for (auto i = X.row_ptr[v]; i < X.row_ptr[v + 1]; ++i)
          grad->weights(X.idx[i], c) += d * X.val[i];
      }
    }
  }
  total *= inv;
  for (int f = 0; f < m.weights.rows(); ++f) {
    for (int c = 0; c < C; ++c) {
      total += 0.5 * l2 * m.weights(f, c) * m.weights(f, c);
      if (grad) grad->weights(f, c) += l2 * m.weights(f, c);
    }
  }
  if (loss) *loss = total;
}

double logreg_loss(const LogRegModel& m, const FeatureMatrix& X,
                   const std::vector<int>& labels, const std::vector<int>& train,
                   double l2) {
  double loss = 0.0;
  logreg_loss_grad(m, X, labels, train, l2, &loss, nullptr);
  return loss;
}

LogRegFit fit_logreg(const FeatureMatrix& X, const std::vector<int>& labels,
                     const std::vector<int>& train, int C, const LogRegConfig& cfg) {
  if (train.empty()) throw InputError("fit_logreg: empty training set");
  for (int v : train) {
    if (v < 0 || v >= X.n) throw InputError("fit_logreg: train node out of range");
    if (labels[v] < 0 || labels[v] >= C)
      throw InputError("fit_logreg: train node " + std::to_string(v) +
                       " has no label in [0, C)");
  }

  LogRegFit fit;
  fit.model.weights = Mat(X.f, C);
  fit.model.bias.assign(C, 0.0);

  std::vector<int> seen(C, 0);
  for (int v : train) seen[labels[v]] = 1;
  for (int c = 0; c < C; ++c)
    if (!seen[c])
      fit.warnings.push_back("class " + std::to_string(c) +
                             " absent from training set; its column is uninformed");

  double step = cfg.step;
  double loss;
  LogRegModel grad;
  logreg_loss_grad(fit.model, X, labels, train, cfg.l2, &loss, &grad);
  fit.loss_history.push_back(loss);
  for (int it = 0; it < cfg.iterations; ++it) {
    // Halving fallback keeps the recorded losses non-increasing when the
    // fixed step overshoots.
    LogRegModel trial;
    double trial_loss;
    for (;;) {
      trial = fit.model;
      for (std::size_t i = 0; i < trial.weights.size(); ++i)
        trial.weights.data()[i] -= step * grad.weights.data()[i];
      for (int c = 0; c < C; ++c) trial.bias[c] -= step * grad.bias[c];
      trial_loss = logreg_loss(trial, X, labels, train, cfg.l2);
      if (trial_loss <= loss || step < 1e-12) break;
      step *= 0.5;
    }
    fit.model = std::move(trial);
    loss = trial_loss;
    fit.loss_history.push_back(loss);
    logreg_loss_grad(fit.model, X, labels, train, cfg.l2, nullptr, &grad);
  }
  return fit;
}

PriorMatrix predict_priors(const LogRegModel& m, const FeatureMatrix& X) {
  check_contract(m.weights.rows() == X.f, "predict_priors: feature width mismatch");
  const int C = static_cast<int>(m.bias.size());
  check_contract(m.weights.cols() == C, "predict_priors: weights/bias mismatch");
  PriorMatrix out{Mat(X.n, C), C};
  std::vector<double> logits;
  for (int v = 0; v < X.n; ++v) {
    node_logits(X, m, v, logits);
    const auto p = softmax_row(logits);
    for (int c = 0; c < C; ++c) out.Q(v, c) = p[c] - 1.0 / C;
  }
  return out;
}

PriorMatrix label_priors(const std::vector<int>& labels, const std::vector<int>& train,
                         int n, int C) {
  PriorMatrix out{Mat(n, C), C};
  for (int v : train) {
    const int y = labels[v];
    if (y < 0 || y >= C)
      throw InputError("label_priors: train node " + std::to_string(v) +
                       " has label outside [0, C)");
    // one-hot minus 1/C; unlabeled rows stay at the centered uniform (zero)
    for (int c = 0; c < C; ++c) out.Q(v, c) = (c == y ? 1.0 : 0.0) - 1.0 / C;
  }
  return out;
}

}  // namespace pmrf
