#pragma once

#include <span>
#include <vector>

#include "pmrf/coupling.hpp"
#include "pmrf/graph.hpp"
#include "pmrf/linbp.hpp"
#include "pmrf/priors.hpp"

namespace pmrf {

enum class Regularizer { consistency, none, l1, l2 };

struct Hyperparams {
  double gamma1 = 0.1;    // learning rate for W
  double gamma2 = 0.001;  // learning rate for H
  double lambda = 0.1;    // regularization weight
  int outer_iters = 4;    // alternations of propagate + learn
  int inner_steps = 4;    // gradient steps per alternation
  Regularizer reg = Regularizer::consistency;
  int extra_propagate_steps = 1;  // propagations with the final (W, H) before predicting
  // Optional bound on the per-edge coupling: after each step every w_e is
  // shrunk so the entries of w_e * H stay inside [-1/C, 1 - 1/C], i.e. the
  // uncentered per-edge potentials remain valid. Off by default.
  bool clip_couplings = false;
};

// Shrinks w toward zero until every entry of w * H lies in [-1/C, 1 - 1/C].
double clip_to_coupling_box(double w, const CouplingMatrix& H);

// Snapshot threaded through one alternation: P is the current P(t), sigma_t
// its row-wise softmax (the regularizer evaluates against these, the loss
// against the P(t+1) recomputed from the candidates).
struct TrainState {
  const SparseGraph* g = nullptr;
  const PriorMatrix* Q = nullptr;
  const std::vector<int>* labels = nullptr;  // size n, -1 = unlabeled
  const std::vector<int>* train = nullptr;
  Hyperparams hp;
  BeliefMatrix P;  // P(t)
  Mat sigma_t;     // softmax of each P(t) row
  int outer_iter = 0;
};

TrainState make_train_state(const SparseGraph& g, const PriorMatrix& Q,
                            const std::vector<int>& labels, const std::vector<int>& train,
                            const Hyperparams& hp, BeliefMatrix P);

// Numerically stable softmax (max subtraction).
std::vector<double> softmax_row(std::span<const double> p);
Mat softmax_rows(const Mat& P);

// Sum (not mean) over train nodes of -log softmax(p_l)[y_l].
double cross_entropy_loss(const BeliefMatrix& P_next, const std::vector<int>& labels,
                          const std::vector<int>& train);

// R = -sum_{(u,v) in E} sigma(p_u) . w_uv H . sigma(p_v)^T, each undirected
// edge once. More consistent beliefs make R more negative.
double consistency_reg(const BeliefMatrix& P, const SparseGraph& g,
                       const EdgeWeights& w, const CouplingMatrix& H);
double consistency_reg_sigma(const Mat& sigma, const SparseGraph& g,
                             const EdgeWeights& w, const CouplingMatrix& H);

// cross_entropy_loss(Q + W_cand P(t) H_cand) + lambda * R(variant). The
// lambda == 0 path skips the regularizer entirely so every variant follows
// the identical trajectory.
double objective(const TrainState& s, const EdgeWeights& W_cand,
                 const CouplingMatrix& H_cand);

// Per-edge-record gradient. Cross-entropy part touches only edges incident
// to labeled train nodes; the regularizer part touches every edge.
std::vector<double> grad_W(const TrainState& s, const EdgeWeights& W_cand,
                           const CouplingMatrix& H_cand);

// Gradient with respect to the symmetric parameterization of H: entry (i, j)
// with i != j carries both orientations of the tied pair (H_ij, H_ji), the
// diagonal carries its single partial. Matches central differences of
// `objective` under symmetric perturbation. Always symmetric.
Mat grad_H(const TrainState& s, const EdgeWeights& W_cand, const CouplingMatrix& H_cand);

struct HistoryEntry {
  int outer = 0;
  int inner = 0;  // 0 = objective at the alternation start, k = after step k
  double objective = 0.0;
};

struct FitResult {
  EdgeWeights W;
  CouplingMatrix H;
  BeliefMatrix P;  // from the last alternation's propagate step
  std::vector<HistoryEntry> history;
};

// The alternating optimizer: each outer iteration propagates P once with the
// current (W, H), then applies inner_steps joint gradient-descent updates
// W <- W - gamma1 * grad_W, H <- H - gamma2 * grad_H, H re-symmetrized by
// averaging after every step. Candidates start from the previous iteration's
// values. Throws NumericalError naming the step if the objective goes
// non-finite.
FitResult fit(const SparseGraph& g, const PriorMatrix& Q, const std::vector<int>& labels,
              const std::vector<int>& train, const Hyperparams& hp);

// The last alternation's P advanced by extra_steps propagations with the
// final parameters.
BeliefMatrix final_beliefs(const SparseGraph& g, const PriorMatrix& Q,
                           const FitResult& r, int extra_steps);

// Argmax over final_beliefs with the shared tie rule.
std::vector<int> predict_final(const SparseGraph& g, const PriorMatrix& Q,
                               const FitResult& r, int extra_steps);

}  // namespace pmrf
