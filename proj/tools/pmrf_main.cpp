// pmrf: train/evaluate LinBP and coupling-matrix learning on graph datasets.
//
// Subcommands: train, sweep, stats, export-coupling, gen-sbm. Any flag can
// also come from a key=value config file (--config); command line wins.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmrf/dataset.hpp"
#include "pmrf/errors.hpp"
#include "pmrf/runner.hpp"
#include "pmrf/version.hpp"

namespace {

void add_common_run_flags(CLI::App* cmd, pmrf::RunConfig& cfg, std::string& method,
                          std::string& priors) {
  cmd->add_option("--data", cfg.dataset_dir, "dataset directory")->required();
  cmd->add_option("--method", method, "linbp|lcm|lcm-wo|lcm-l1|lcm-l2");
  cmd->add_option("--gamma1", cfg.hp.gamma1, "learning rate for W");
  cmd->add_option("--gamma2", cfg.hp.gamma2, "learning rate for H");
  cmd->add_option("--lambda", cfg.hp.lambda, "regularization weight");
  cmd->add_option("--outer", cfg.hp.outer_iters, "alternating iterations");
  cmd->add_option("--inner", cfg.hp.inner_steps, "gradient steps per iteration");
  cmd->add_option("--extra-steps", cfg.hp.extra_propagate_steps,
                  "extra propagations with the final parameters before predicting");
  cmd->add_option("--iters", cfg.linbp_iters, "fixed LinBP iteration count (-1 = tolerance mode)");
  cmd->add_option("--tol", cfg.linbp_tol, "LinBP convergence tolerance");
  cmd->add_option("--max-iter", cfg.linbp_max_iter, "LinBP iteration cap");
  cmd->add_option("--per-class", cfg.split.per_class, "train nodes sampled per class");
  cmd->add_option("--val-total", cfg.split.val_total, "validation nodes sampled in total");
  cmd->add_option("--test-count", cfg.split.test_count,
                  "test sample size (-1 = all remaining labeled nodes)");
  cmd->add_option("--fixed-test", cfg.fixed_test_path,
                  "split file whose test rows form a fixed test set");
  cmd->add_option("--seeds", cfg.seeds, "comma-separated seed list")->delimiter(',');
  cmd->add_option("--priors", priors, "auto|logreg|labels");
  cmd->add_option("--logreg-iters", cfg.logreg.iterations, "logistic regression iterations");
  cmd->add_option("--logreg-step", cfg.logreg.step, "logistic regression step size");
  cmd->add_option("--logreg-l2", cfg.logreg.l2, "logistic regression L2 penalty");
  cmd->add_flag("--clip", cfg.hp.clip_couplings,
                "bound per-edge couplings to the valid potential box after each step");
  cmd->add_flag("--normalize-features", cfg.normalize_features,
                "L1-normalize feature rows before fitting priors");
  cmd->add_flag("--infer-n", cfg.infer_n, "node count = max edge id + 1 instead of meta.txt");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->set_config("--config", "", "key=value file supplying any flag");
}

void finish_config(pmrf::RunConfig& cfg, const std::string& method, const std::string& priors) {
  cfg.method = pmrf::parse_method(method);
  if (priors == "auto")
    cfg.prior_mode = pmrf::PriorMode::auto_detect;
  else if (priors == "logreg")
    cfg.prior_mode = pmrf::PriorMode::logreg;
  else if (priors == "labels")
    cfg.prior_mode = pmrf::PriorMode::labels;
  else
    throw pmrf::ConfigError("unknown prior mode '" + priors + "' (auto|logreg|labels)");
}

void print_summary(const pmrf::TrainSummary& s, const std::string& method) {
  std::printf("%-8s %-6s %-10s %-10s %-10s\n", "seed", "", "train", "val", "test");
  for (const auto& oc : s.per_seed)
    std::printf("%-8llu %-6s %-10.4f %-10.4f %-10.4f\n",
                static_cast<unsigned long long>(oc.seed), "", oc.train_acc, oc.val_acc,
                oc.test_acc);
  std::printf("%s test accuracy: %.4f +/- %.4f over %zu seeds\n", method.c_str(),
              s.test_mean, s.test_std, s.per_seed.size());
  if (!s.per_seed.empty()) {
    const auto& t = s.per_seed.front().timings;
    std::printf("phases (first seed, seconds): load %.3f, priors %.3f, fit %.3f, predict %.3f\n",
                t.load_s, t.priors_s, t.fit_s, t.predict_s);
  }
}

void print_stats(const pmrf::StatsReport& st) {
  auto cell = [](const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string("absent");
  };
  std::printf("%-10s %-22s %-22s\n", "", "homo", "hetero");
  std::printf("%-10s %-22s %-22s\n", "init", cell(st.init.homo_mean).c_str(),
              cell(st.init.hetero_mean).c_str());
  std::printf("%-10s %-22s %-22s\n", "learnt", cell(st.learnt.homo_mean).c_str(),
              cell(st.learnt.hetero_mean).c_str());
  std::printf("edges: %lld homo, %lld hetero, %lld excluded (unlabeled endpoint)\n",
              static_cast<long long>(st.init.homo_count),
              static_cast<long long>(st.init.hetero_count),
              static_cast<long long>(st.init.excluded_unlabeled));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pMRF node classification: LinBP inference and coupling-matrix learning"};
  app.set_version_flag("--version", pmrf::kVersion);
  app.require_subcommand(1);

  pmrf::RunConfig cfg;
  std::string method = "lcm";
  std::string priors = "auto";

  auto* train_cmd = app.add_subcommand("train", "train/evaluate one method over seeds");
  add_common_run_flags(train_cmd, cfg, method, priors);

  auto* sweep_cmd = app.add_subcommand("sweep", "grid search, select by validation accuracy");
  add_common_run_flags(sweep_cmd, cfg, method, priors);
  sweep_cmd->add_option("--grid-gamma1", cfg.grid_gamma1, "gamma1 grid")->delimiter(',');
  sweep_cmd->add_option("--grid-gamma2", cfg.grid_gamma2, "gamma2 grid")->delimiter(',');
  sweep_cmd->add_option("--grid-lambda", cfg.grid_lambda, "lambda grid")->delimiter(',');
  sweep_cmd->add_option("--grid-iters", cfg.grid_linbp_iters, "LinBP iteration grid")
      ->delimiter(',');

  std::string stats_run, stats_out;
  auto* stats_cmd = app.add_subcommand("stats", "homo/hetero weight averages of a run");
  stats_cmd->add_option("--run", stats_run, "completed run directory")->required();
  stats_cmd->add_option("--out", stats_out, "write stats JSON here");

  std::string exp_run, exp_out;
  int exp_classes = 0;
  auto* exp_cmd = app.add_subcommand("export-coupling", "re-export a coupling matrix as CSV");
  exp_cmd->add_option("--run", exp_run, "completed run directory");
  exp_cmd->add_option("--classes", exp_classes, "export the initial coupling for C classes");
  exp_cmd->add_option("--out", exp_out, "output base path")->required();

  int sbm_n = 400, sbm_c = 2;
  double sbm_pin = 0.05, sbm_pout = 0.005;
  std::uint64_t sbm_seed = 1;
  std::string sbm_out;
  auto* sbm_cmd = app.add_subcommand("gen-sbm", "generate a planted-partition dataset");
  sbm_cmd->add_option("--n", sbm_n, "node count");
  sbm_cmd->add_option("--classes", sbm_c, "community count");
  sbm_cmd->add_option("--p-in", sbm_pin, "within-community edge probability");
  sbm_cmd->add_option("--p-out", sbm_pout, "across-community edge probability");
  sbm_cmd->add_option("--seed", sbm_seed, "generator seed");
  sbm_cmd->add_option("--out", sbm_out, "dataset directory to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train_cmd->parsed()) {
      finish_config(cfg, method, priors);
      const auto summary = pmrf::run_train(cfg);
      print_summary(summary, method);
    } else if (sweep_cmd->parsed()) {
      finish_config(cfg, method, priors);
      const auto res = pmrf::run_sweep(cfg);
      if (cfg.method == pmrf::Method::linbp)
        std::printf("selected iters=%d (val mean %.4f%s)\n", res.best_linbp_iters,
                    res.best_val_mean, res.tie ? ", tie broken by grid order" : "");
      else
        std::printf("selected gamma1=%g gamma2=%g lambda=%g (val mean %.4f%s)\n",
                    res.best_hp.gamma1, res.best_hp.gamma2, res.best_hp.lambda,
                    res.best_val_mean, res.tie ? ", tie broken by grid order" : "");
      print_summary(res.best_summary, method);
    } else if (stats_cmd->parsed()) {
      const auto st = pmrf::run_stats(stats_run, stats_out);
      print_stats(st);
    } else if (exp_cmd->parsed()) {
      if (!exp_run.empty())
        pmrf::run_export_coupling(exp_run, exp_out);
      else if (exp_classes >= 2)
        pmrf::export_initial_coupling(exp_classes, exp_out);
      else
        throw pmrf::ConfigError("export-coupling needs --run or --classes");
      std::printf("wrote %s_centered.csv and %s_uncentered.csv\n", exp_out.c_str(),
                  exp_out.c_str());
    } else if (sbm_cmd->parsed()) {
      const auto ds = pmrf::gen_sbm(sbm_n, sbm_c, sbm_pin, sbm_pout, sbm_seed);
      pmrf::write_dataset(ds, sbm_out);
      std::printf("wrote %s: n=%d m=%lld C=%d\n", sbm_out.c_str(), ds.graph.n,
                  static_cast<long long>(ds.graph.m), ds.C);
    }
  } catch (const pmrf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pmrf::InputError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const pmrf::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
