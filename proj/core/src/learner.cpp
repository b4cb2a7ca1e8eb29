#include "pmrf/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmrf/errors.hpp"

namespace pmrf {

std::vector<double> softmax_row(std::span<const double> p) {
  double m = p[0];
  for (double x : p) m = std::max(m, x);
  std::vector<double> out(p.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = std::exp(p[i] - m);
    z += out[i];
  }
  for (double& x : out) x /= z;
  return out;
}

Mat softmax_rows(const Mat& P) {
  Mat out(P.rows(), P.cols());
  for (int v = 0; v < P.rows(); ++v) {
    const auto s = softmax_row(P.row(v));
    for (int c = 0; c < P.cols(); ++c) out(v, c) = s[c];
  }
  return out;
}

TrainState make_train_state(const SparseGraph& g, const PriorMatrix& Q,
                            const std::vector<int>& labels, const std::vector<int>& train,
                            const Hyperparams& hp, BeliefMatrix P) {
  TrainState s;
  s.g = &g;
  s.Q = &Q;
  s.labels = &labels;
  s.train = &train;
  s.hp = hp;
  s.sigma_t = softmax_rows(P.P);
  s.P = std::move(P);
  return s;
}

namespace {

double log_sum_exp(std::span<const double> p) {
  double m = p[0];
  for (double x : p) m = std::max(m, x);
  double z = 0.0;
  for (double x : p) z += std::exp(x - m);
  return m + std::log(z);
}

// sigma(u) . H . sigma(v)^T
double bilinear(std::span<const double> su, const Mat& H, std::span<const double> sv) {
  double total = 0.0;
  for (int i = 0; i < H.rows(); ++i) {
    if (su[i] == 0.0) continue;
    double hi = 0.0;
    for (int j = 0; j < H.cols(); ++j) hi += H(i, j) * sv[j];
    total += su[i] * hi;
  }
  return total;
}

double reg_value(const TrainState& s, const EdgeWeights& W, const CouplingMatrix& H) {
  const auto& g = *s.g;
  switch (s.hp.reg) {
    case Regularizer::none:
      return 0.0;
    case Regularizer::consistency: {
      double r = 0.0;
      for (std::int64_t e = 0; e < g.m; ++e)
        r -= W.w[e] * bilinear(s.sigma_t.row(g.edge_u[e]), H.H, s.sigma_t.row(g.edge_v[e]));
      return r;
    }
    case Regularizer::l1: {
      double r = 0.0;
      for (double x : W.w) r += std::abs(x);
      for (std::size_t i = 0; i < H.H.size(); ++i) r += std::abs(H.H.data()[i]);
      return r;
    }
    case Regularizer::l2: {
      double r = 0.0;
      for (double x : W.w) r += x * x;
      for (std::size_t i = 0; i < H.H.size(); ++i) r += H.H.data()[i] * H.H.data()[i];
      return r;
    }
  }
  return 0.0;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double cross_entropy_loss(const BeliefMatrix& P_next, const std::vector<int>& labels,
                          const std::vector<int>& train) {
  double loss = 0.0;
  for (int l : train) {
    const auto row = P_next.P.row(l);
    loss += log_sum_exp(row) - row[labels[l]];
  }
  return loss;
}

double consistency_reg_sigma(const Mat& sigma, const SparseGraph& g,
                             const EdgeWeights& w, const CouplingMatrix& H) {
  double r = 0.0;
  for (std::int64_t e = 0; e < g.m; ++e)
    r -= w.w[e] * bilinear(sigma.row(g.edge_u[e]), H.H, sigma.row(g.edge_v[e]));
  return r;
}

double consistency_reg(const BeliefMatrix& P, const SparseGraph& g,
                       const EdgeWeights& w, const CouplingMatrix& H) {
  return consistency_reg_sigma(softmax_rows(P.P), g, w, H);
}

double objective(const TrainState& s, const EdgeWeights& W_cand,
                 const CouplingMatrix& H_cand) {
  const BeliefMatrix next = propagate_step(*s.Q, *s.g, W_cand, s.P, H_cand);
  double obj = cross_entropy_loss(next, *s.labels, *s.train);
  if (s.hp.lambda != 0.0) obj += s.hp.lambda * reg_value(s, W_cand, H_cand);
  return obj;
}

std::vector<double> grad_W(const TrainState& s, const EdgeWeights& W_cand,
                           const CouplingMatrix& H_cand) {
  const auto& g = *s.g;
  const auto& labels = *s.labels;
  const int C = H_cand.C;

  const BeliefMatrix next = propagate_step(*s.Q, g, W_cand, s.P, H_cand);
  const Mat PH = mat_mul(s.P.P, H_cand.H);

  // sigma(p_l(t+1)) - y_l, train rows only
  std::vector<char> in_train(g.n, 0);
  Mat delta(g.n, C);
  for (int l : *s.train) {
    in_train[l] = 1;
    const auto sl = softmax_row(next.P.row(l));
    for (int c = 0; c < C; ++c) delta(l, c) = sl[c] - (c == labels[l] ? 1.0 : 0.0);
  }

  std::vector<double> gw(g.m, 0.0);
  for (std::int64_t e = 0; e < g.m; ++e) {
    const int u = g.edge_u[e], v = g.edge_v[e];
    double acc = 0.0;
    if (in_train[u])
      for (int j = 0; j < C; ++j) acc += delta(u, j) * PH(v, j);
    if (in_train[v])
      for (int j = 0; j < C; ++j) acc += delta(v, j) * PH(u, j);
    gw[e] = acc;
  }
  if (s.hp.lambda != 0.0) {
    switch (s.hp.reg) {
      case Regularizer::none:
        break;
      case Regularizer::consistency:
        for (std::int64_t e = 0; e < g.m; ++e)
          gw[e] -= s.hp.lambda *
                   bilinear(s.sigma_t.row(g.edge_u[e]), H_cand.H, s.sigma_t.row(g.edge_v[e]));
        break;
      case Regularizer::l1:
        for (std::int64_t e = 0; e < g.m; ++e) gw[e] += s.hp.lambda * sign(W_cand.w[e]);
        break;
      case Regularizer::l2:
        for (std::int64_t e = 0; e < g.m; ++e) gw[e] += s.hp.lambda * 2.0 * W_cand.w[e];
        break;
    }
  }
  return gw;
}

Mat grad_H(const TrainState& s, const EdgeWeights& W_cand, const CouplingMatrix& H_cand) {
  const auto& g = *s.g;
  const auto& labels = *s.labels;
  const int C = H_cand.C;

  const BeliefMatrix next = propagate_step(*s.Q, g, W_cand, s.P, H_cand);
  const Mat WP = weighted_neighbor_sum(g, W_cand, s.P.P);

  // Free gradient F_ij of the objective in H_ij, orientation as stored.
  Mat F(C, C);
  for (int l : *s.train) {
    const auto sl = softmax_row(next.P.row(l));
    for (int i = 0; i < C; ++i) {
      const double wpli = WP(l, i);
      if (wpli == 0.0) continue;
      for (int j = 0; j < C; ++j)
        F(i, j) += wpli * (sl[j] - (j == labels[l] ? 1.0 : 0.0));
    }
  }
  if (s.hp.lambda != 0.0) {
    switch (s.hp.reg) {
      case Regularizer::none:
        break;
      case Regularizer::consistency:
        for (std::int64_t e = 0; e < g.m; ++e) {
          const auto su = s.sigma_t.row(g.edge_u[e]);
          const auto sv = s.sigma_t.row(g.edge_v[e]);
          const double we = W_cand.w[e] * s.hp.lambda;
          for (int i = 0; i < C; ++i)
            for (int j = 0; j < C; ++j) F(i, j) -= we * su[i] * sv[j];
        }
        break;
      case Regularizer::l1:
        for (int i = 0; i < C; ++i)
          for (int j = 0; j < C; ++j) F(i, j) += s.hp.lambda * sign(H_cand.H(i, j));
        break;
      case Regularizer::l2:
        for (int i = 0; i < C; ++i)
          for (int j = 0; j < C; ++j) F(i, j) += s.hp.lambda * 2.0 * H_cand.H(i, j);
        break;
    }
  }

  // Tied symmetric parameterization: off-diagonal entries accumulate both
  // orientations, the diagonal keeps its single partial.
  Mat G(C, C);
  for (int i = 0; i < C; ++i) {
    G(i, i) = F(i, i);
    for (int j = i + 1; j < C; ++j) {
      const double t = F(i, j) + F(j, i);
      G(i, j) = t;
      G(j, i) = t;
    }
  }
  return G;
}

double clip_to_coupling_box(double w, const CouplingMatrix& H) {
  const double lo = -1.0 / H.C, hi = 1.0 - 1.0 / H.C;
  double scale = 1.0;
  for (std::size_t i = 0; i < H.H.size(); ++i) {
    const double x = w * H.H.data()[i];
    if (x > hi) scale = std::min(scale, hi / x);
    if (x < lo) scale = std::min(scale, lo / x);
  }
  return w * scale;
}

FitResult fit(const SparseGraph& g, const PriorMatrix& Q, const std::vector<int>& labels,
              const std::vector<int>& train, const Hyperparams& hp) {
  if (train.empty()) throw InputError("fit: empty training set");
  check_contract(hp.gamma1 > 0 && hp.gamma2 > 0 && hp.lambda >= 0 && hp.outer_iters >= 1 &&
                     hp.inner_steps >= 0,
                 "fit: invalid hyperparameters");

  FitResult r;
  r.W = init_weights(g);
  r.H = init_coupling(Q.C);
  BeliefMatrix P{Q.Q, 0, false};  // P(0) = Q

  for (int outer = 1; outer <= hp.outer_iters; ++outer) {
    P = propagate_step(Q, g, r.W, P, r.H);
    TrainState s = make_train_state(g, Q, labels, train, hp, std::move(P));
    s.outer_iter = outer;

    r.history.push_back({outer, 0, objective(s, r.W, r.H)});
    if (!std::isfinite(r.history.back().objective))
      throw NumericalError("fit: objective non-finite at outer=" + std::to_string(outer) +
                           " inner=0");
    for (int inner = 1; inner <= hp.inner_steps; ++inner) {
      const auto gw = grad_W(s, r.W, r.H);
      const Mat gh = grad_H(s, r.W, r.H);
      for (std::int64_t e = 0; e < g.m; ++e) r.W.w[e] -= hp.gamma1 * gw[e];
      for (int i = 0; i < Q.C; ++i)
        for (int j = 0; j < Q.C; ++j) r.H.H(i, j) -= hp.gamma2 * gh(i, j);
      // guard against drift; gh is already symmetric
      for (int i = 0; i < Q.C; ++i)
        for (int j = i + 1; j < Q.C; ++j) {
          const double avg = 0.5 * (r.H.H(i, j) + r.H.H(j, i));
          r.H.H(i, j) = avg;
          r.H.H(j, i) = avg;
        }
      if (hp.clip_couplings)
        for (std::int64_t e = 0; e < g.m; ++e)
          r.W.w[e] = clip_to_coupling_box(r.W.w[e], r.H);
      const double obj = objective(s, r.W, r.H);
      if (!std::isfinite(obj))
        throw NumericalError("fit: objective non-finite at outer=" +
                             std::to_string(outer) + " inner=" + std::to_string(inner));
      r.history.push_back({outer, inner, obj});
    }
    P = std::move(s.P);
  }
  r.P = std::move(P);
  return r;
}

BeliefMatrix final_beliefs(const SparseGraph& g, const PriorMatrix& Q,
                           const FitResult& r, int extra_steps) {
  BeliefMatrix P = r.P;
  for (int i = 0; i < extra_steps; ++i) P = propagate_step(Q, g, r.W, P, r.H);
  return P;
}

std::vector<int> predict_final(const SparseGraph& g, const PriorMatrix& Q,
                               const FitResult& r, int extra_steps) {
  return predict(final_beliefs(g, Q, r, extra_steps));
}

}  // namespace pmrf
