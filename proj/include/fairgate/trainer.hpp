#ifndef FAIRGATE_TRAINER_HPP
#define FAIRGATE_TRAINER_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fairgate/types.hpp"

namespace fairgate {

// Row-major affine layer: w has out*in entries, b has out.
struct AffineLayer {
  int in = 0, out = 0;
  std::vector<double> w;
  std::vector<double> b;
};

// Small MLP spoof classifier: two tanh encoder layers producing the
// embedding, a linear spoof head, and (for adversarial training) a linear
// gender head. The gender head is always initialised so that runs with and
// without it share the encoder starting point at equal seeds.
struct MlpModel {
  AffineLayer l1, l2;
  AffineLayer spoof_head;
  AffineLayer gender_head;
};

enum class Strategy { Plain, S1, S2, S3, Eafr };

Strategy parse_training_strategy(const std::string& name);
const char* to_string(Strategy strategy);

struct TrainConfig {
  Strategy strategy = Strategy::Plain;
  double lambda_fair = -1.0;  // negative: default per strategy (0.1 s2, 0.5 eafr)
  double lambda_adv = 0.05;
  int batch_size = 24;
  int epochs = 30;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
  int hidden_width = 32;
  int embed_width = 16;
};

// One training batch (or any sample set): row-major features plus per-sample
// spoof and female indicators (1.0f when true).
struct Batch {
  std::vector<double> x;
  std::vector<float> spoof;
  std::vector<float> female;
  std::size_t n = 0, d = 0;
};

struct ForwardPass {
  std::vector<double> hidden;      // n x hidden_width, post-tanh
  std::vector<double> embeddings;  // n x embed_width, post-tanh
  std::vector<double> spoof_logits;
  std::vector<double> gender_logits;
};

ForwardPass forward(const MlpModel& model, const std::vector<double>& x,
                    std::size_t n);

// Mean of per-sample binary cross-entropy with logits (softplus form). When
// weights are given the per-sample terms are scaled before the mean, so
// uniform weight w scales the loss by w.
double bce_loss(const std::vector<double>& logits, const std::vector<float>& labels,
                const std::vector<double>* weights = nullptr);

// Inverse-frequency cell weights N_total / (4 N_cell), indexed gender*2+label.
std::array<double, 4> s1_weights(const std::array<long, 4>& cell_counts);
std::array<long, 4> cell_counts(const std::vector<Trial>& trials);

struct SoftRates {
  double fpr_f = 0.0, fpr_m = 0.0;
  double fnr_f = 0.0, fnr_m = 0.0;
};

// Soft error rates from predicted spoof probabilities: FPR^_g is the mean
// probability over bonafide samples of gender g, FNR^_g the mean complement
// over spoof samples. Throws EmptyCell when any (gender, label) cell is
// absent.
SoftRates soft_group_rates(const std::vector<double>& probs,
                           const std::vector<float>& spoof,
                           const std::vector<float>& female);

// lambda * (|FPR^_F - FPR^_M| + |FNR^_F - FNR^_M|); the |.| subgradient at a
// tie is 0.
double s2_penalty(const SoftRates& rates, double lambda_fair);

// Gradient reversal: forward is the identity, backward multiplies the
// upstream cotangent by -lambda_adv.
std::vector<double> grl_backward(const std::vector<double>& upstream,
                                 double lambda_adv);

// Parameter gradients of one head's mean BCE over a batch: the spoof head's
// (optionally sample-weighted) or the gender head's, each with the encoder
// gradients it induces.
struct BranchGradients {
  AffineLayer l1, l2, head;
};

BranchGradients branch_gradients(const MlpModel& model, const Batch& batch,
                                 bool gender_branch,
                                 const std::vector<double>* weights = nullptr);

// The reversal as applied to a gender-branch gradient set: every encoder
// entry is scaled by -lambda_adv in a single multiply; the head entries pass
// through unscaled (the gender head itself minimises its loss).
BranchGradients grl_reverse(const BranchGradients& gender, double lambda_adv);

struct EpochStats {
  double loss = 0.0;        // mean per-batch training objective
  double fpr_gap = 0.0;     // epoch-level soft-rate gaps (F - M), full forward
  double fnr_gap = 0.0;
  double epoch_penalty = 0.0;  // epoch-accumulated fairness penalty value
  long skipped_batches = 0;    // batches whose fairness penalty was skipped
};

struct TrainHistory {
  std::string strategy;
  std::vector<EpochStats> epochs;
};

struct TrainResult {
  MlpModel model;
  Dataset exported;  // original trials rescored, encoder embeddings, linear head
  TrainHistory history;
};

MlpModel init_model(int input_dim, const TrainConfig& config);

// Seeded SGD over the train-split embedding records. The exported dataset
// carries every trial rescored by the trained model (higher = more bonafide),
// the encoder embeddings for every record, and the matching linear head.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

// Max relative error between analytic gradients and central finite
// differences of the strategy's objective at the given point. The batch must
// not sit at a soft-rate tie when the strategy penalises rate gaps.
double gradient_check(const MlpModel& model, const Batch& batch,
                      const TrainConfig& config);

}  // namespace fairgate

#endif  // FAIRGATE_TRAINER_HPP
