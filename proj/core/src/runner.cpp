#include "pmrf/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "pmrf/errors.hpp"
#include "pmrf/version.hpp"

namespace pmrf {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

Method parse_method(const std::string& s) {
  if (s == "linbp") return Method::linbp;
  if (s == "lcm") return Method::lcm;
  if (s == "lcm-wo") return Method::lcm_wo;
  if (s == "lcm-l1") return Method::lcm_l1;
  if (s == "lcm-l2") return Method::lcm_l2;
  throw ConfigError("unknown method '" + s + "' (linbp|lcm|lcm-wo|lcm-l1|lcm-l2)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::linbp: return "linbp";
    case Method::lcm: return "lcm";
    case Method::lcm_wo: return "lcm-wo";
    case Method::lcm_l1: return "lcm-l1";
    case Method::lcm_l2: return "lcm-l2";
  }
  return "?";
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& labels,
                const std::vector<int>& nodes) {
  if (nodes.empty()) return 0.0;
  std::int64_t hit = 0;
  for (int v : nodes)
    if (pred[v] == labels[v]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(nodes.size());
}

EdgeWeightStats weight_stats(const SparseGraph& g, const std::vector<double>& w,
                             const std::vector<int>& labels) {
  EdgeWeightStats st;
  double homo_sum = 0, hetero_sum = 0;
  for (std::int64_t e = 0; e < g.m; ++e) {
    const int lu = labels[g.edge_u[e]], lv = labels[g.edge_v[e]];
    if (lu < 0 || lv < 0) {
      ++st.excluded_unlabeled;
    } else if (lu == lv) {
      ++st.homo_count;
      homo_sum += w[e];
    } else {
      ++st.hetero_count;
      hetero_sum += w[e];
    }
  }
  if (st.homo_count > 0) st.homo_mean = homo_sum / st.homo_count;
  if (st.hetero_count > 0) st.hetero_mean = hetero_sum / st.hetero_count;
  return st;
}

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Dataset load_for_run(const RunConfig& cfg) {
  Dataset ds = load_dataset(cfg.dataset_dir, cfg.infer_n);
  if (cfg.normalize_features && ds.features) ds.features = l1_normalized(*ds.features);
  return ds;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string reg_name(Regularizer r) {
  switch (r) {
    case Regularizer::consistency: return "consistency";
    case Regularizer::none: return "none";
    case Regularizer::l1: return "l1";
    case Regularizer::l2: return "l2";
  }
  return "?";
}

// Effective hyperparameters for a method variant: lcm-wo drops the
// regularizer (lambda forced to 0).
Hyperparams variant_hp(const RunConfig& cfg) {
  Hyperparams hp = cfg.hp;
  switch (cfg.method) {
    case Method::lcm: hp.reg = Regularizer::consistency; break;
    case Method::lcm_wo:
      hp.reg = Regularizer::none;
      hp.lambda = 0.0;
      break;
    case Method::lcm_l1: hp.reg = Regularizer::l1; break;
    case Method::lcm_l2: hp.reg = Regularizer::l2; break;
    case Method::linbp: break;
  }
  return hp;
}

struct SeedInputs {
  Split split;
  PriorMatrix Q;
  std::vector<std::string> logreg_warnings;
  std::string prior_mode_used;
  double priors_s = 0;
};

SeedInputs prepare_seed(const RunConfig& cfg, const Dataset& ds, std::uint64_t seed) {
  SeedInputs in;
  SplitSpec spec = cfg.split;
  if (!cfg.fixed_test_path.empty())
    spec.fixed_test = load_split_file(cfg.fixed_test_path, ds.graph.n).test;
  in.split = sample_split(ds, spec, seed);

  PriorMode mode = cfg.prior_mode;
  if (mode == PriorMode::auto_detect)
    mode = ds.features ? PriorMode::logreg : PriorMode::labels;
  if (mode == PriorMode::logreg && !ds.features)
    throw ConfigError("prior mode 'logreg' needs a dataset with features");

  const double t0 = now_s();
  if (mode == PriorMode::logreg) {
    in.prior_mode_used = "logreg";
    auto fit = fit_logreg(*ds.features, ds.labels, in.split.train, ds.C, cfg.logreg);
    in.logreg_warnings = fit.warnings;
    in.Q = predict_priors(fit.model, *ds.features);
  } else {
    in.prior_mode_used = "labels";
    in.Q = label_priors(ds.labels, in.split.train, ds.graph.n, ds.C);
  }
  in.priors_s = now_s() - t0;
  return in;
}

struct SeedEval {
  std::vector<int> predictions;
  Mat final_P;
  EdgeWeights w_init, w_learnt;
  CouplingMatrix H_final;
  std::vector<HistoryEntry> history;
  ConvergenceDiag diag_init;
  double train_acc = 0, val_acc = 0, test_acc = 0;
  double fit_s = 0, predict_s = 0;
  bool linbp_converged = true;
  int linbp_iterations = 0;
};

SeedEval eval_seed(const RunConfig& cfg, const Dataset& ds, const SeedInputs& in) {
  SeedEval ev;
  ev.w_init = init_weights(ds.graph);
  ev.diag_init = check_convergence(ds.graph, ev.w_init, init_coupling(ds.C));

  const double t0 = now_s();
  if (cfg.method == Method::linbp) {
    SolveOptions opt;
    opt.tol = cfg.linbp_tol;
    opt.max_iter = cfg.linbp_max_iter;
    opt.fixed_iters = cfg.linbp_iters;
    const auto H0 = init_coupling(ds.C);
    const auto P = solve_linbp(in.Q, ds.graph, ev.w_init, H0, opt);
    ev.fit_s = now_s() - t0;
    const double t1 = now_s();
    ev.predictions = predict(P);
    ev.predict_s = now_s() - t1;
    ev.final_P = P.P;
    ev.w_learnt = ev.w_init;
    ev.H_final = H0;
    ev.linbp_converged = P.converged;
    ev.linbp_iterations = P.iterations;
  } else {
    const Hyperparams hp = variant_hp(cfg);
    auto fit_res = fit(ds.graph, in.Q, ds.labels, in.split.train, hp);
    ev.fit_s = now_s() - t0;
    const double t1 = now_s();
    const auto P = final_beliefs(ds.graph, in.Q, fit_res, hp.extra_propagate_steps);
    ev.predictions = predict(P);
    ev.predict_s = now_s() - t1;
    ev.final_P = P.P;
    ev.history = std::move(fit_res.history);
    ev.w_learnt = std::move(fit_res.W);
    ev.H_final = std::move(fit_res.H);
  }
  ev.train_acc = accuracy(ev.predictions, ds.labels, in.split.train);
  ev.val_acc = accuracy(ev.predictions, ds.labels, in.split.val);
  ev.test_acc = accuracy(ev.predictions, ds.labels, in.split.test);
  return ev;
}

json config_json(const RunConfig& cfg) {
  json j;
  j["dataset"] = cfg.dataset_dir;
  j["method"] = method_name(cfg.method);
  j["gamma1"] = cfg.hp.gamma1;
  j["gamma2"] = cfg.hp.gamma2;
  j["lambda"] = cfg.hp.lambda;
  j["outer_iters"] = cfg.hp.outer_iters;
  j["inner_steps"] = cfg.hp.inner_steps;
  j["regularizer"] = reg_name(variant_hp(cfg).reg);
  j["extra_propagate_steps"] = cfg.hp.extra_propagate_steps;
  j["clip_couplings"] = cfg.hp.clip_couplings;
  j["linbp_iters"] = cfg.linbp_iters;
  j["linbp_tol"] = cfg.linbp_tol;
  j["linbp_max_iter"] = cfg.linbp_max_iter;
  j["per_class"] = cfg.split.per_class;
  j["val_total"] = cfg.split.val_total;
  j["test_count"] = cfg.split.test_count;
  j["fixed_test"] = cfg.fixed_test_path;
  j["prior_mode"] = cfg.prior_mode == PriorMode::auto_detect ? "auto"
                    : cfg.prior_mode == PriorMode::logreg    ? "logreg"
                                                             : "labels";
  j["logreg_iterations"] = cfg.logreg.iterations;
  j["logreg_step"] = cfg.logreg.step;
  j["logreg_l2"] = cfg.logreg.l2;
  j["normalize_features"] = cfg.normalize_features;
  j["infer_n"] = cfg.infer_n;
  j["seeds"] = cfg.seeds;
  return j;
}

json stats_json(const EdgeWeightStats& st) {
  json j;
  if (st.homo_mean)
    j["homo_mean"] = *st.homo_mean;
  else
    j["homo_mean"] = nullptr;
  if (st.hetero_mean)
    j["hetero_mean"] = *st.hetero_mean;
  else
    j["hetero_mean"] = nullptr;
  j["homo_count"] = st.homo_count;
  j["hetero_count"] = st.hetero_count;
  j["excluded_unlabeled"] = st.excluded_unlabeled;
  return j;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
}

void write_seed_artifacts(const RunConfig& cfg, const Dataset& ds, std::uint64_t seed,
                          const SeedInputs& in, const SeedEval& ev, double load_s,
                          const fs::path& run_dir) {
  fs::create_directories(run_dir);

  // predictions.csv: node, class scores, predicted class
  {
    std::ostringstream os;
    os << "node";
    for (int c = 0; c < ds.C; ++c) os << ",score_" << c;
    os << ",predicted_class\n";
    for (int v = 0; v < ds.graph.n; ++v) {
      os << v;
      for (int c = 0; c < ds.C; ++c) os << "," << fmt17(ev.final_P(v, c));
      os << "," << ev.predictions[v] << "\n";
    }
    write_text(run_dir / "predictions.csv", os.str());
  }
  // weights.csv: per-edge initialized and learnt weights
  {
    std::ostringstream os;
    os << "u,v,w_init,w_learnt\n";
    for (std::int64_t e = 0; e < ds.graph.m; ++e)
      os << ds.graph.edge_u[e] << "," << ds.graph.edge_v[e] << ","
         << fmt17(ev.w_init.w[e]) << "," << fmt17(ev.w_learnt.w[e]) << "\n";
    write_text(run_dir / "weights.csv", os.str());
  }
  export_coupling_csv(ev.H_final, run_dir / "coupling_centered.csv",
                      run_dir / "coupling_uncentered.csv");

  json report;
  report["schema"] = 1;
  report["version"] = kVersion;
  report["seed"] = seed;
  report["config"] = config_json(cfg);
  report["dataset"] = {{"name", ds.name},
                       {"n", ds.graph.n},
                       {"m", ds.graph.m},
                       {"C", ds.C},
                       {"features", ds.features.has_value()}};
  report["split"] = {{"train", in.split.train.size()},
                     {"val", in.split.val.size()},
                     {"test", in.split.test.size()}};
  report["prior_mode_used"] = in.prior_mode_used;
  report["logreg_warnings"] = in.logreg_warnings;
  report["initial_convergence"] = {{"rho_W", ev.diag_init.rho_W},
                                   {"rho_H", ev.diag_init.rho_H},
                                   {"product", ev.diag_init.rho_W * ev.diag_init.rho_H},
                                   {"satisfied", ev.diag_init.satisfied}};
  if (cfg.method == Method::linbp) {
    report["linbp"] = {{"converged", ev.linbp_converged},
                       {"iterations", ev.linbp_iterations}};
  } else {
    json hist = json::array();
    for (const auto& h : ev.history)
      hist.push_back({{"outer", h.outer}, {"inner", h.inner}, {"objective", h.objective}});
    report["history"] = std::move(hist);
  }
  report["accuracy"] = {{"train", ev.train_acc}, {"val", ev.val_acc}, {"test", ev.test_acc}};
  report["weight_stats"] = {{"init", stats_json(weight_stats(ds.graph, ev.w_init.w, ds.labels))},
                            {"learnt", stats_json(weight_stats(ds.graph, ev.w_learnt.w, ds.labels))}};
  report["files"] = {{"predictions", "predictions.csv"},
                     {"weights", "weights.csv"},
                     {"coupling_centered", "coupling_centered.csv"},
                     {"coupling_uncentered", "coupling_uncentered.csv"}};
  write_text(run_dir / "report.json", report.dump(2) + "\n");

  // wall clock lives apart so report.json stays byte-identical across reruns
  json timings;
  timings["load_s"] = load_s;
  timings["priors_s"] = in.priors_s;
  timings["fit_s"] = ev.fit_s;
  timings["predict_s"] = ev.predict_s;
  write_text(run_dir / "timings.json", timings.dump(2) + "\n");
}

double mean_of(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / xs.size();
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double s = 0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / (xs.size() - 1));
}

}  // namespace

TrainSummary run_train(const RunConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  const double t0 = now_s();
  const Dataset ds = load_for_run(cfg);
  const double load_s = now_s() - t0;

  TrainSummary summary;
  summary.out_dir = cfg.out_dir.empty() ? fs::path{} : fs::path(cfg.out_dir);
  std::vector<double> test_accs, val_accs;
  for (const auto seed : cfg.seeds) {
    const auto in = prepare_seed(cfg, ds, seed);
    const auto ev = eval_seed(cfg, ds, in);
    SeedOutcome oc;
    oc.seed = seed;
    oc.train_acc = ev.train_acc;
    oc.val_acc = ev.val_acc;
    oc.test_acc = ev.test_acc;
    oc.timings = {load_s, in.priors_s, ev.fit_s, ev.predict_s};
    if (!summary.out_dir.empty()) {
      oc.run_dir = summary.out_dir / ("seed_" + std::to_string(seed));
      write_seed_artifacts(cfg, ds, seed, in, ev, load_s, oc.run_dir);
    }
    test_accs.push_back(ev.test_acc);
    val_accs.push_back(ev.val_acc);
    summary.per_seed.push_back(std::move(oc));
  }
  summary.test_mean = mean_of(test_accs);
  summary.test_std = sample_std(test_accs);
  summary.val_mean = mean_of(val_accs);

  if (!summary.out_dir.empty()) {
    fs::create_directories(summary.out_dir);
    json j;
    j["schema"] = 1;
    j["version"] = kVersion;
    j["config"] = config_json(cfg);
    json per = json::array();
    for (const auto& oc : summary.per_seed)
      per.push_back({{"seed", oc.seed},
                     {"train_acc", oc.train_acc},
                     {"val_acc", oc.val_acc},
                     {"test_acc", oc.test_acc}});
    j["per_seed"] = std::move(per);
    j["test_mean"] = summary.test_mean;
    j["test_std"] = summary.test_std;
    j["val_mean"] = summary.val_mean;
    write_text(summary.out_dir / "summary.json", j.dump(2) + "\n");
  }
  return summary;
}

SweepResult run_sweep(const RunConfig& cfg) {
  if (cfg.split.val_total <= 0 && cfg.fixed_test_path.empty())
    throw ConfigError("sweep needs a nonempty validation split");
  const Dataset ds = load_for_run(cfg);

  std::vector<SeedInputs> inputs;
  inputs.reserve(cfg.seeds.size());
  for (const auto seed : cfg.seeds) inputs.push_back(prepare_seed(cfg, ds, seed));

  SweepResult result;
  json grid_report = json::array();

  if (cfg.method == Method::linbp) {
    std::vector<int> iters = cfg.grid_linbp_iters;
    if (iters.empty()) iters = {5, 10, 15, 20};
    bool first = true;
    for (int it : iters) {
      RunConfig point = cfg;
      point.linbp_iters = it;
      std::vector<double> vals;
      for (const auto& in : inputs) vals.push_back(eval_seed(point, ds, in).val_acc);
      const double vm = mean_of(vals);
      grid_report.push_back({{"iters", it}, {"val_mean", vm}});
      if (first || vm > result.best_val_mean) {
        result.best_val_mean = vm;
        result.best_linbp_iters = it;
        result.tie = false;
        first = false;
      } else if (vm == result.best_val_mean) {
        result.tie = true;
      }
    }
    RunConfig best = cfg;
    best.linbp_iters = result.best_linbp_iters;
    result.best_hp = cfg.hp;
    result.best_summary = run_train(best);
  } else {
    std::vector<double> g1 = cfg.grid_gamma1, g2 = cfg.grid_gamma2, lam = cfg.grid_lambda;
    if (g1.empty()) g1 = {0.02, 0.05, 0.1, 0.2};
    if (g2.empty()) g2 = {0.0002, 0.0005, 0.001, 0.002};
    if (lam.empty()) lam = {0.02, 0.05, 0.1, 0.2};
    if (cfg.method == Method::lcm_wo) lam = {0.0};  // lambda has no effect

    bool first = true;
    for (double a : g1)
      for (double b : g2)
        for (double l : lam) {
          RunConfig point = cfg;
          point.hp.gamma1 = a;
          point.hp.gamma2 = b;
          point.hp.lambda = l;
          std::vector<double> vals;
          for (const auto& in : inputs) vals.push_back(eval_seed(point, ds, in).val_acc);
          const double vm = mean_of(vals);
          grid_report.push_back(
              {{"gamma1", a}, {"gamma2", b}, {"lambda", l}, {"val_mean", vm}});
          if (first || vm > result.best_val_mean) {
            result.best_val_mean = vm;
            result.best_hp = variant_hp(point);
            result.best_hp.gamma1 = a;
            result.best_hp.gamma2 = b;
            result.best_hp.lambda = l;
            result.tie = false;
            first = false;
          } else if (vm == result.best_val_mean) {
            result.tie = true;
          }
        }
    RunConfig best = cfg;
    best.hp.gamma1 = result.best_hp.gamma1;
    best.hp.gamma2 = result.best_hp.gamma2;
    best.hp.lambda = result.best_hp.lambda;
    result.best_summary = run_train(best);
  }

  if (!cfg.out_dir.empty()) {
    json j;
    j["schema"] = 1;
    j["version"] = kVersion;
    j["config"] = config_json(cfg);
    j["grid"] = std::move(grid_report);
    if (cfg.method == Method::linbp) {
      j["best"] = {{"iters", result.best_linbp_iters}};
    } else {
      j["best"] = {{"gamma1", result.best_hp.gamma1},
                   {"gamma2", result.best_hp.gamma2},
                   {"lambda", result.best_hp.lambda}};
    }
    j["tie"] = result.tie;
    j["best_val_mean"] = result.best_val_mean;
    j["test_mean"] = result.best_summary.test_mean;
    j["test_std"] = result.best_summary.test_std;
    fs::create_directories(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / "sweep.json", j.dump(2) + "\n");
  }
  return result;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

StatsReport run_stats(const fs::path& run_dir, const fs::path& out_file) {
  const auto report_path = run_dir / "report.json";
  std::ifstream rin(report_path);
  if (!rin) throw InputError("missing run artifact " + report_path.string());
  json report = json::parse(rin);
  const std::string dataset_dir = report["config"]["dataset"].get<std::string>();
  const bool infer_n = report["config"]["infer_n"].get<bool>();
  const Dataset ds = load_dataset(dataset_dir, infer_n);

  const auto rows = read_csv(run_dir / "weights.csv");
  if (rows.empty() || rows[0].size() != 4 || rows[0][0] != "u")
    throw InputError("malformed weights.csv in " + run_dir.string());
  std::vector<double> w_init, w_learnt;
  SparseGraph g = ds.graph;
  if (static_cast<std::int64_t>(rows.size()) - 1 != g.m)
    throw InputError("weights.csv edge count does not match dataset");
  w_init.resize(g.m);
  w_learnt.resize(g.m);
  for (std::int64_t e = 0; e < g.m; ++e) {
    w_init[e] = std::stod(rows[e + 1][2]);
    w_learnt[e] = std::stod(rows[e + 1][3]);
  }

  StatsReport st;
  st.init = weight_stats(g, w_init, ds.labels);
  st.learnt = weight_stats(g, w_learnt, ds.labels);

  if (!out_file.empty()) {
    json j;
    j["run_dir"] = run_dir.string();
    j["init"] = stats_json(st.init);
    j["learnt"] = stats_json(st.learnt);
    write_text(out_file, j.dump(2) + "\n");
  }
  return st;
}

void run_export_coupling(const fs::path& run_dir, const fs::path& out_base) {
  const auto rows = read_csv(run_dir / "coupling_centered.csv");
  if (rows.empty()) throw InputError("missing coupling_centered.csv in " + run_dir.string());
  const int C = static_cast<int>(rows.size());
  CouplingMatrix cm{Mat(C, C), C};
  for (int i = 0; i < C; ++i) {
    if (static_cast<int>(rows[i].size()) != C)
      throw InputError("coupling_centered.csv is not square");
    for (int j = 0; j < C; ++j) cm.H(i, j) = std::stod(rows[i][j]);
  }
  export_coupling_csv(cm, out_base.string() + "_centered.csv",
                      out_base.string() + "_uncentered.csv");
}

void export_initial_coupling(int C, const fs::path& out_base) {
  export_coupling_csv(init_coupling(C), out_base.string() + "_centered.csv",
                      out_base.string() + "_uncentered.csv");
}

}  // namespace pmrf
