#ifndef FAIRGATE_COMMANDS_HPP
#define FAIRGATE_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fairgate/types.hpp"

namespace fairgate {

// Exit codes shared by every subcommand: 0 clean, 1 input/config error,
// 2 bias confirmed (diagnose only).
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBiasConfirmed = 2;

struct CommonOptions {
  std::uint64_t seed = 1;
  bool spoof_high = false;     // input scores are spoof-high; flip on load
  std::string out_dir = ".";
};

struct SynthArgs {
  std::string preset = "balanced-clean";
  long n_per_cell = 0;  // 0 keeps the preset default
};

struct DiagnoseArgs {
  std::string trials;
  std::string embeddings;  // optional
};

struct EvaluateArgs {
  std::string trials;
  std::string embeddings;  // optional unless a suppression strategy runs ...
  std::string head;        // ... in which case both are required
  std::string strategy = "baseline";
  bool grid = false;
  std::string system_label = "baseline";  // row label for the unedited system
  int suppress_k = 3;
  bool gnea_shift = false;  // mean-shift alignment instead of constant
  bool eop_true_positive = false;
};

struct CalibrateArgs {
  std::string trials;
};

struct TrainArgs {
  std::string trials;
  std::string embeddings;
  std::string strategy = "plain";
  double lambda_fair = -1.0;  // negative: strategy default
  double lambda_adv = 0.05;
  int batch_size = 24;
  int epochs = 30;
  double learning_rate = 0.05;
  int hidden_width = 32;
  int embed_width = 16;
};

struct ReportArgs {
  std::string trials;
  int bins = 40;
};

int cmd_synth(const SynthArgs& args, const CommonOptions& common, std::ostream& out);
int cmd_diagnose(const DiagnoseArgs& args, const CommonOptions& common,
                 std::ostream& out);
int cmd_evaluate(const EvaluateArgs& args, const CommonOptions& common,
                 std::ostream& out);
int cmd_calibrate(const CalibrateArgs& args, const CommonOptions& common,
                  std::ostream& out);
int cmd_train(const TrainArgs& args, const CommonOptions& common, std::ostream& out);
int cmd_report(const ReportArgs& args, const CommonOptions& common, std::ostream& out);

}  // namespace fairgate

#endif  // FAIRGATE_COMMANDS_HPP
