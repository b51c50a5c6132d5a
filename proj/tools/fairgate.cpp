#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "fairgate/commands.hpp"
#include "fairgate/report.hpp"

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
  if (const char* env = std::getenv("FAIRGATE_THREADS")) {
    const int threads = std::atoi(env);
    if (threads >= 1) omp_set_num_threads(threads);
  }
#endif
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{"Fairness audit for binary spoof detectors: diagnose gender bias "
               "sources, apply mitigations, and report fairness metrics."};
  app.set_version_flag("--version", std::string(fairgate::kVersion));
  app.require_subcommand(1);

  fairgate::CommonOptions common;
  std::string polarity = "bonafide-high";
  app.add_option("--seed", common.seed, "Seed for all randomised steps")
      ->capture_default_str();
  app.add_option("--polarity", polarity,
                 "Score convention of the input files: bonafide-high or spoof-high")
      ->check(CLI::IsMember({"bonafide-high", "spoof-high"}))
      ->capture_default_str();
  app.add_option("--out", common.out_dir, "Output directory for this run")
      ->capture_default_str();

  fairgate::SynthArgs synth;
  CLI::App* cmd_synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  cmd_synth->add_option("--preset", synth.preset, "Scenario preset name")
      ->capture_default_str();
  cmd_synth->add_option("--n-per-cell", synth.n_per_cell,
                        "Override trials per (gender, label) cell");

  fairgate::DiagnoseArgs diagnose;
  CLI::App* cmd_diagnose =
      app.add_subcommand("diagnose", "Run the eight bias-source checks");
  cmd_diagnose->add_option("--trials", diagnose.trials, "Trial list TSV")->required();
  cmd_diagnose->add_option("--embeddings", diagnose.embeddings,
                           "Embedding CSV (enables the model-level checks)");

  fairgate::EvaluateArgs evaluate;
  CLI::App* cmd_evaluate =
      app.add_subcommand("evaluate", "Score mitigation strategies on the eval split");
  cmd_evaluate->add_option("--trials", evaluate.trials, "Trial list TSV")->required();
  cmd_evaluate->add_option("--embeddings", evaluate.embeddings,
                           "Embedding CSV (needed for suppression strategies)");
  cmd_evaluate->add_option("--head", evaluate.head,
                           "Linear head CSV (needed for suppression strategies)");
  cmd_evaluate->add_option("--strategy", evaluate.strategy, "Strategy to evaluate")
      ->capture_default_str();
  cmd_evaluate->add_flag("--grid", evaluate.grid, "Evaluate every applicable strategy");
  cmd_evaluate
      ->add_option("--system-label", evaluate.system_label,
                   "Row label for the unedited system (e.g. s3 for an "
                   "adversarially trained export)")
      ->capture_default_str();
  cmd_evaluate->add_option("--suppress-k", evaluate.suppress_k,
                           "Dimensions suppressed by sgfs/gnea")
      ->capture_default_str();
  cmd_evaluate->add_flag("--gnea-shift", evaluate.gnea_shift,
                         "Mean-shift alignment instead of the constant");
  cmd_evaluate->add_flag("--eop-tpr", evaluate.eop_true_positive,
                         "Equal-opportunity on true-positive rates");

  fairgate::CalibrateArgs calibrate;
  CLI::App* cmd_calibrate =
      app.add_subcommand("calibrate", "Per-gender thresholds from the dev split");
  cmd_calibrate->add_option("--trials", calibrate.trials, "Trial list TSV")->required();

  fairgate::TrainArgs train;
  CLI::App* cmd_train =
      app.add_subcommand("train", "Train the small spoof classifier on embeddings");
  cmd_train->add_option("--trials", train.trials, "Trial list TSV")->required();
  cmd_train->add_option("--embeddings", train.embeddings, "Embedding CSV")->required();
  cmd_train->add_option("--strategy", train.strategy,
                        "plain, s1, s2, s3, or eafr")
      ->capture_default_str();
  cmd_train->add_option("--lambda-fair", train.lambda_fair,
                        "Fairness penalty weight (default 0.1 for s2, 0.5 for eafr)");
  cmd_train->add_option("--lambda-adv", train.lambda_adv, "Adversarial weight for s3")
      ->capture_default_str();
  cmd_train->add_option("--batch-size", train.batch_size, "SGD batch size")
      ->capture_default_str();
  cmd_train->add_option("--epochs", train.epochs, "Training epochs")
      ->capture_default_str();
  cmd_train->add_option("--learning-rate", train.learning_rate, "SGD learning rate")
      ->capture_default_str();
  cmd_train->add_option("--hidden-width", train.hidden_width, "Encoder hidden width")
      ->capture_default_str();
  cmd_train->add_option("--embed-width", train.embed_width, "Embedding width")
      ->capture_default_str();

  fairgate::ReportArgs report;
  CLI::App* cmd_report =
      app.add_subcommand("report", "Score histograms and per-cell summary");
  cmd_report->add_option("--trials", report.trials, "Trial list TSV")->required();
  cmd_report->add_option("--bins", report.bins, "Histogram bins")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  common.spoof_high = polarity == "spoof-high";

  if (cmd_synth->parsed()) return fairgate::cmd_synth(synth, common, std::cout);
  if (cmd_diagnose->parsed()) return fairgate::cmd_diagnose(diagnose, common, std::cout);
  if (cmd_evaluate->parsed()) return fairgate::cmd_evaluate(evaluate, common, std::cout);
  if (cmd_calibrate->parsed()) {
    return fairgate::cmd_calibrate(calibrate, common, std::cout);
  }
  if (cmd_train->parsed()) return fairgate::cmd_train(train, common, std::cout);
  if (cmd_report->parsed()) return fairgate::cmd_report(report, common, std::cout);
  std::cerr << "no subcommand\n";
  return fairgate::kExitError;
}
