#include "fairgate/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "fairgate/rng.hpp"

namespace fairgate {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  return std::log1p(std::exp(-std::fabs(z))) + std::max(z, 0.0);
}

// BCE with logits: softplus(z) - y*z.
double bce_one(double logit, double label) {
  return softplus(logit) - static_cast<double>(label) * logit;
}

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

SoftRates soft_group_rates_from_logits(const std::vector<double>& logits,
                                       const std::vector<float>& spoof,
                                       const std::vector<float>& female) {
  std::vector<double> probs(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) probs[i] = sigmoid(logits[i]);
  return soft_group_rates(probs, spoof, female);
}

AffineLayer zeros_like(const AffineLayer& a) {
  AffineLayer z;
  z.in = a.in;
  z.out = a.out;
  z.w.assign(a.w.size(), 0.0);
  z.b.assign(a.b.size(), 0.0);
  return z;
}

void init_affine(AffineLayer& layer, int in, int out, Rng& rng) {
  layer.in = in;
  layer.out = out;
  layer.w.resize(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
  layer.b.assign(static_cast<std::size_t>(out), 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& w : layer.w) w = (2.0 * rng.uniform() - 1.0) * scale;
}

MlpModel init_with(int input_dim, const TrainConfig& config, Rng& rng) {
  if (input_dim < 1) {
    throw Error(Errc::InvalidConfig, "input dimension must be positive");
  }
  MlpModel model;
  init_affine(model.l1, input_dim, config.hidden_width, rng);
  init_affine(model.l2, config.hidden_width, config.embed_width, rng);
  init_affine(model.spoof_head, config.embed_width, 1, rng);
  init_affine(model.gender_head, config.embed_width, 1, rng);
  return model;
}

struct StepGradients {
  AffineLayer l1, l2, spoof_head, gender_head;
};

StepGradients zeros_like(const MlpModel& model) {
  return {zeros_like(model.l1), zeros_like(model.l2), zeros_like(model.spoof_head),
          zeros_like(model.gender_head)};
}

// Backprop of one scalar head through the encoder; dz is the per-sample
// cotangent on that head's logit (reduction already folded in).
BranchGradients backward_branch(const MlpModel& model, const ForwardPass& f,
                                const Batch& batch, const std::vector<double>& dz,
                                bool gender_branch) {
  const AffineLayer& head = gender_branch ? model.gender_head : model.spoof_head;
  BranchGradients g{zeros_like(model.l1), zeros_like(model.l2), zeros_like(head)};
  const std::size_t d = batch.d;
  const auto h = static_cast<std::size_t>(model.l1.out);
  const auto emb = static_cast<std::size_t>(model.l2.out);

  std::vector<double> dz2(emb), dz1(h);
  for (std::size_t i = 0; i < batch.n; ++i) {
    const double dzi = dz[i];
    if (dzi == 0.0) continue;
    const double* e = &f.embeddings[i * emb];
    const double* a = &f.hidden[i * h];
    const double* x = &batch.x[i * d];

    for (std::size_t j = 0; j < emb; ++j) g.head.w[j] += dzi * e[j];
    g.head.b[0] += dzi;
    for (std::size_t j = 0; j < emb; ++j) {
      dz2[j] = dzi * head.w[j] * (1.0 - e[j] * e[j]);
    }
    for (std::size_t j = 0; j < emb; ++j) {
      const double v = dz2[j];
      if (v == 0.0) continue;
      double* row = &g.l2.w[j * h];
      for (std::size_t k = 0; k < h; ++k) row[k] += v * a[k];
      g.l2.b[j] += v;
    }
    for (std::size_t k = 0; k < h; ++k) {
      double da = 0.0;
      for (std::size_t j = 0; j < emb; ++j) da += model.l2.w[j * h + k] * dz2[j];
      dz1[k] = da * (1.0 - a[k] * a[k]);
    }
    for (std::size_t k = 0; k < h; ++k) {
      const double v = dz1[k];
      if (v == 0.0) continue;
      double* row = &g.l1.w[k * d];
      for (std::size_t dd = 0; dd < d; ++dd) row[dd] += v * x[dd];
      g.l1.b[k] += v;
    }
  }
  return g;
}

void add_into(AffineLayer& acc, const AffineLayer& g) {
  for (std::size_t i = 0; i < acc.w.size(); ++i) acc.w[i] += g.w[i];
  for (std::size_t i = 0; i < acc.b.size(); ++i) acc.b[i] += g.b[i];
}

// Cotangents of the mean BCE on the spoof head, with optional per-sample
// weights folded in.
std::vector<double> bce_cotangent(const ForwardPass& f, const Batch& batch,
                                  const std::vector<double>* weights) {
  std::vector<double> dz(batch.n);
  const double inv_n = 1.0 / static_cast<double>(batch.n);
  for (std::size_t i = 0; i < batch.n; ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    dz[i] = w * (sigmoid(f.spoof_logits[i]) - static_cast<double>(batch.spoof[i])) * inv_n;
  }
  return dz;
}

struct CellTally {
  long n[4] = {0, 0, 0, 0};  // gender*2 + label
};

CellTally tally_cells(const Batch& batch) {
  CellTally t;
  for (std::size_t i = 0; i < batch.n; ++i) {
    const int g = batch.female[i] == 1.0f ? 0 : 1;
    const int y = batch.spoof[i] == 1.0f ? 1 : 0;
    ++t.n[g * 2 + y];
  }
  return t;
}

// Cotangents of the soft-rate penalty on the spoof logits (zero when any
// cell is empty; caller decides whether that is an error).
bool penalty_cotangent(const ForwardPass& f, const Batch& batch, double lambda,
                       std::vector<double>& dz) {
  const CellTally cells = tally_cells(batch);
  for (int c = 0; c < 4; ++c) {
    if (cells.n[c] == 0) return false;
  }
  double sum[4] = {0, 0, 0, 0};  // sum of p over each cell
  std::vector<double> probs(batch.n);
  for (std::size_t i = 0; i < batch.n; ++i) {
    probs[i] = sigmoid(f.spoof_logits[i]);
    const int g = batch.female[i] == 1.0f ? 0 : 1;
    const int y = batch.spoof[i] == 1.0f ? 1 : 0;
    sum[g * 2 + y] += probs[i];
  }
  const double fpr_f = sum[0] / static_cast<double>(cells.n[0]);
  const double fpr_m = sum[2] / static_cast<double>(cells.n[2]);
  const double fnr_f = 1.0 - sum[1] / static_cast<double>(cells.n[1]);
  const double fnr_m = 1.0 - sum[3] / static_cast<double>(cells.n[3]);
  const double s_fpr = sign0(fpr_f - fpr_m);
  const double s_fnr = sign0(fnr_f - fnr_m);

  dz.assign(batch.n, 0.0);
  for (std::size_t i = 0; i < batch.n; ++i) {
    const bool female = batch.female[i] == 1.0f;
    const bool spoof = batch.spoof[i] == 1.0f;
    double dp;
    if (!spoof) {
      // FPR term: d|fpr_f - fpr_m| picks up +sign for F, -sign for M.
      const double cell = static_cast<double>(cells.n[female ? 0 : 2]);
      dp = (female ? s_fpr : -s_fpr) * lambda / cell;
    } else {
      // FNR term uses (1 - p), flipping the sign once more.
      const double cell = static_cast<double>(cells.n[female ? 1 : 3]);
      dp = (female ? -s_fnr : s_fnr) * lambda / cell;
    }
    dz[i] = dp * probs[i] * (1.0 - probs[i]);
  }
  return true;
}

std::vector<double> gender_cotangent(const ForwardPass& f, const Batch& batch) {
  std::vector<double> dz(batch.n);
  const double inv_n = 1.0 / static_cast<double>(batch.n);
  for (std::size_t i = 0; i < batch.n; ++i) {
    dz[i] = (sigmoid(f.gender_logits[i]) - static_cast<double>(batch.female[i])) * inv_n;
  }
  return dz;
}

void sgd_update(AffineLayer& layer, const AffineLayer& grad, double lr) {
  for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w[i] -= lr * grad.w[i];
  for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= lr * grad.b[i];
}

void sgd_update(MlpModel& model, const StepGradients& g, double lr) {
  sgd_update(model.l1, g.l1, lr);
  sgd_update(model.l2, g.l2, lr);
  sgd_update(model.spoof_head, g.spoof_head, lr);
  sgd_update(model.gender_head, g.gender_head, lr);
}

double resolved_lambda_fair(const TrainConfig& config) {
  if (config.lambda_fair >= 0.0) return config.lambda_fair;
  if (config.strategy == Strategy::S2) return 0.1;
  if (config.strategy == Strategy::Eafr) return 0.5;
  return 0.0;
}

void validate(const TrainConfig& config) {
  if (config.lambda_adv < 0.0) {
    throw Error(Errc::InvalidConfig, "lambda_adv must be >= 0");
  }
  if (config.batch_size < 2) {
    throw Error(Errc::InvalidConfig, "batch_size must be >= 2");
  }
  if (config.epochs < 1) throw Error(Errc::InvalidConfig, "epochs must be >= 1");
  if (config.learning_rate <= 0.0) {
    throw Error(Errc::InvalidConfig, "learning_rate must be positive");
  }
  if (config.hidden_width < 1 || config.embed_width < 1) {
    throw Error(Errc::InvalidConfig, "layer widths must be positive");
  }
}

// Analytic gradients of one batch objective: the gradients a single training
// step applies (before the learning rate). EAFR's epoch-end penalty step is
// produced separately via penalty_gradients.
StepGradients strategy_gradients(const MlpModel& model, const Batch& batch,
                                 const TrainConfig& config,
                                 const std::vector<double>* sample_weights,
                                 long* skipped) {
  const ForwardPass f = forward(model, batch.x, batch.n);
  StepGradients total = zeros_like(model);

  std::vector<double> dz = bce_cotangent(f, batch, sample_weights);
  if (config.strategy == Strategy::S2) {
    std::vector<double> dz_pen;
    if (penalty_cotangent(f, batch, resolved_lambda_fair(config), dz_pen)) {
      for (std::size_t i = 0; i < batch.n; ++i) dz[i] += dz_pen[i];
    } else if (skipped) {
      ++*skipped;
    }
  }
  const BranchGradients spoof = backward_branch(model, f, batch, dz, false);
  add_into(total.l1, spoof.l1);
  add_into(total.l2, spoof.l2);
  add_into(total.spoof_head, spoof.head);

  if (config.strategy == Strategy::S3) {
    const BranchGradients gender =
        backward_branch(model, f, batch, gender_cotangent(f, batch), true);
    const BranchGradients reversed = grl_reverse(gender, config.lambda_adv);
    add_into(total.l1, reversed.l1);
    add_into(total.l2, reversed.l2);
    add_into(total.gender_head, reversed.head);
  }
  return total;
}

StepGradients penalty_gradients(const MlpModel& model, const Batch& batch,
                                double lambda) {
  const ForwardPass f = forward(model, batch.x, batch.n);
  std::vector<double> dz;
  if (!penalty_cotangent(f, batch, lambda, dz)) {
    throw Error(Errc::EmptyCell, "a (gender, label) cell is empty at epoch scale");
  }
  StepGradients total = zeros_like(model);
  const BranchGradients spoof = backward_branch(model, f, batch, dz, false);
  add_into(total.l1, spoof.l1);
  add_into(total.l2, spoof.l2);
  add_into(total.spoof_head, spoof.head);
  return total;
}

}  // namespace

Strategy parse_training_strategy(const std::string& name) {
  if (name == "plain") return Strategy::Plain;
  if (name == "s1") return Strategy::S1;
  if (name == "s2") return Strategy::S2;
  if (name == "s3") return Strategy::S3;
  if (name == "eafr") return Strategy::Eafr;
  throw Error(Errc::UnknownStrategy, "unknown training strategy '" + name + "'");
}

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Plain: return "plain";
    case Strategy::S1: return "s1";
    case Strategy::S2: return "s2";
    case Strategy::S3: return "s3";
    default: return "eafr";
  }
}

ForwardPass forward(const MlpModel& model, const std::vector<double>& x,
                    std::size_t n) {
  const auto d = static_cast<std::size_t>(model.l1.in);
  if (x.size() != n * d) {
    throw Error(Errc::DimensionMismatch, "feature matrix does not match model input");
  }
  const auto h = static_cast<std::size_t>(model.l1.out);
  const auto emb = static_cast<std::size_t>(model.l2.out);

  ForwardPass f;
  f.hidden.resize(n * h);
  f.embeddings.resize(n * emb);
  f.spoof_logits.resize(n);
  f.gender_logits.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = &x[i * d];
    double* a = &f.hidden[i * h];
    for (std::size_t k = 0; k < h; ++k) {
      double z = model.l1.b[k];
      const double* row = &model.l1.w[k * d];
      for (std::size_t dd = 0; dd < d; ++dd) z += row[dd] * xi[dd];
      a[k] = std::tanh(z);
    }
    double* e = &f.embeddings[i * emb];
    for (std::size_t j = 0; j < emb; ++j) {
      double z = model.l2.b[j];
      const double* row = &model.l2.w[j * h];
      for (std::size_t k = 0; k < h; ++k) z += row[k] * a[k];
      e[j] = std::tanh(z);
    }
    double zs = model.spoof_head.b[0];
    for (std::size_t j = 0; j < emb; ++j) zs += model.spoof_head.w[j] * e[j];
    f.spoof_logits[i] = zs;
    if (!model.gender_head.b.empty()) {
      double zg = model.gender_head.b[0];
      for (std::size_t j = 0; j < emb; ++j) zg += model.gender_head.w[j] * e[j];
      f.gender_logits[i] = zg;
    }
  }
  return f;
}

double bce_loss(const std::vector<double>& logits, const std::vector<float>& labels,
                const std::vector<double>* weights) {
  if (logits.size() != labels.size() || (weights && weights->size() != logits.size())) {
    throw Error(Errc::DimensionMismatch, "bce inputs must have equal length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    sum += w * bce_one(logits[i], static_cast<double>(labels[i]));
  }
  return sum / static_cast<double>(logits.size());
}

std::array<double, 4> s1_weights(const std::array<long, 4>& cell_counts) {
  long total = 0;
  for (int c = 0; c < 4; ++c) {
    if (cell_counts[static_cast<std::size_t>(c)] == 0) {
      throw Error(Errc::EmptyCell,
                  std::string("empty training cell ") +
                      (c / 2 == 0 ? "F" : "M") + "/" +
                      (c % 2 == 0 ? "bonafide" : "spoof"));
    }
    total += cell_counts[static_cast<std::size_t>(c)];
  }
  std::array<double, 4> w;
  for (int c = 0; c < 4; ++c) {
    w[static_cast<std::size_t>(c)] =
        static_cast<double>(total) /
        (4.0 * static_cast<double>(cell_counts[static_cast<std::size_t>(c)]));
  }
  return w;
}

std::array<long, 4> cell_counts(const std::vector<Trial>& trials) {
  std::array<long, 4> n = {0, 0, 0, 0};
  for (const Trial& t : trials) {
    ++n[static_cast<std::size_t>(t.gender) * 2 + static_cast<std::size_t>(t.label)];
  }
  return n;
}

SoftRates soft_group_rates(const std::vector<double>& probs,
                           const std::vector<float>& spoof,
                           const std::vector<float>& female) {
  if (probs.size() != spoof.size() || probs.size() != female.size()) {
    throw Error(Errc::DimensionMismatch, "soft-rate inputs must have equal length");
  }
  double sum[4] = {0, 0, 0, 0};
  long n[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const int c = (female[i] == 1.0f ? 0 : 2) + (spoof[i] == 1.0f ? 1 : 0);
    sum[c] += probs[i];
    ++n[c];
  }
  for (int c = 0; c < 4; ++c) {
    if (n[c] == 0) {
      throw Error(Errc::EmptyCell, std::string("empty cell ") +
                                       (c / 2 == 0 ? "F" : "M") + "/" +
                                       (c % 2 == 0 ? "bonafide" : "spoof"));
    }
  }
  SoftRates r;
  r.fpr_f = sum[0] / static_cast<double>(n[0]);
  r.fpr_m = sum[2] / static_cast<double>(n[2]);
  r.fnr_f = 1.0 - sum[1] / static_cast<double>(n[1]);
  r.fnr_m = 1.0 - sum[3] / static_cast<double>(n[3]);
  return r;
}

double s2_penalty(const SoftRates& rates, double lambda_fair) {
  return lambda_fair * (std::fabs(rates.fpr_f - rates.fpr_m) +
                        std::fabs(rates.fnr_f - rates.fnr_m));
}

std::vector<double> grl_backward(const std::vector<double>& upstream,
                                 double lambda_adv) {
  std::vector<double> down(upstream.size());
  for (std::size_t i = 0; i < upstream.size(); ++i) down[i] = -lambda_adv * upstream[i];
  return down;
}

BranchGradients branch_gradients(const MlpModel& model, const Batch& batch,
                                 bool gender_branch,
                                 const std::vector<double>* weights) {
  const ForwardPass f = forward(model, batch.x, batch.n);
  const std::vector<double> dz =
      gender_branch ? gender_cotangent(f, batch) : bce_cotangent(f, batch, weights);
  return backward_branch(model, f, batch, dz, gender_branch);
}

BranchGradients grl_reverse(const BranchGradients& gender, double lambda_adv) {
  BranchGradients out = gender;
  for (double& w : out.l1.w) w = -lambda_adv * w;
  for (double& b : out.l1.b) b = -lambda_adv * b;
  for (double& w : out.l2.w) w = -lambda_adv * w;
  for (double& b : out.l2.b) b = -lambda_adv * b;
  return out;  // the head keeps its own unscaled gradients
}

MlpModel init_model(int input_dim, const TrainConfig& config) {
  validate(config);
  Rng rng(config.seed);
  return init_with(input_dim, config, rng);
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  validate(config);
  const double lambda_fair = resolved_lambda_fair(config);

  if (!dataset.has_embeddings()) {
    throw Error(Errc::MissingEmbeddings, "training requires embedding records");
  }
  std::unordered_map<std::string, Split> splits;
  splits.reserve(dataset.trials.size());
  for (const Trial& t : dataset.trials) splits.emplace(t.utt_id, t.split);

  const std::size_t d = dataset.embed_dim();
  Batch all;
  all.d = d;
  std::array<long, 4> cells = {0, 0, 0, 0};
  for (const EmbeddingRecord& rec : dataset.embeddings) {
    const auto it = splits.find(rec.utt_id);
    if (it == splits.end() || it->second != Split::Train) continue;
    if (rec.vec.size() != d) {
      throw Error(Errc::DimensionMismatch,
                  "embedding dimension mismatch for '" + rec.utt_id + "'");
    }
    all.x.insert(all.x.end(), rec.vec.begin(), rec.vec.end());
    all.spoof.push_back(rec.label == Label::Spoof ? 1.0f : 0.0f);
    all.female.push_back(rec.gender == Gender::F ? 1.0f : 0.0f);
    ++cells[static_cast<std::size_t>(rec.gender) * 2 +
            static_cast<std::size_t>(rec.label)];
    ++all.n;
  }
  if (all.n == 0) {
    throw Error(Errc::MissingSplit, "no train-split embedding records");
  }

  // Per-sample weights for inverse-frequency training; Eafr needs every cell
  // populated for its epoch-level rates.
  std::vector<double> sample_weights;
  if (config.strategy == Strategy::S1) {
    const std::array<double, 4> w4 = s1_weights(cells);
    sample_weights.resize(all.n);
    for (std::size_t i = 0; i < all.n; ++i) {
      const int c = (all.female[i] == 1.0f ? 0 : 2) + (all.spoof[i] == 1.0f ? 1 : 0);
      sample_weights[i] = w4[static_cast<std::size_t>(c)];
    }
  }
  if (config.strategy == Strategy::Eafr) {
    for (int c = 0; c < 4; ++c) {
      if (cells[static_cast<std::size_t>(c)] == 0) {
        throw Error(Errc::EmptyCell, "epoch-level rates need every (gender, label) cell");
      }
    }
  }

  Rng rng(config.seed);
  TrainResult result;
  result.model = init_with(static_cast<int>(d), config, rng);
  result.history.strategy = to_string(config.strategy);

  std::vector<std::size_t> order(all.n);
  for (std::size_t i = 0; i < all.n; ++i) order[i] = i;

  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  Batch batch;
  batch.d = d;
  std::vector<double> batch_weights;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    EpochStats stats;
    double loss_sum = 0.0;
    long n_batches = 0;

    for (std::size_t start = 0; start < all.n; start += batch_size) {
      const std::size_t bn = std::min(batch_size, all.n - start);
      batch.n = bn;
      batch.x.resize(bn * d);
      batch.spoof.resize(bn);
      batch.female.resize(bn);
      batch_weights.resize(bn);
      for (std::size_t i = 0; i < bn; ++i) {
        const std::size_t src = order[start + i];
        std::copy_n(&all.x[src * d], d, &batch.x[i * d]);
        batch.spoof[i] = all.spoof[src];
        batch.female[i] = all.female[src];
        if (!sample_weights.empty()) batch_weights[i] = sample_weights[src];
      }
      const std::vector<double>* weights =
          sample_weights.empty() ? nullptr : &batch_weights;

      const ForwardPass f = forward(result.model, batch.x, bn);
      double objective = bce_loss(f.spoof_logits, batch.spoof, weights);
      if (config.strategy == Strategy::S2) {
        try {
          const SoftRates rates =
              soft_group_rates_from_logits(f.spoof_logits, batch.spoof, batch.female);
          objective += s2_penalty(rates, lambda_fair);
        } catch (const Error&) {
          // empty cell in the batch: counted in strategy_gradients below
        }
      } else if (config.strategy == Strategy::S3) {
        objective += bce_loss(f.gender_logits, batch.female);
      }
      if (!std::isfinite(objective)) {
        throw Error(Errc::NanLoss, "non-finite training loss at epoch " +
                                       std::to_string(epoch) + ", batch " +
                                       std::to_string(n_batches));
      }
      loss_sum += objective;
      ++n_batches;

      const StepGradients grads = strategy_gradients(result.model, batch, config,
                                                     weights, &stats.skipped_batches);
      sgd_update(result.model, grads, config.learning_rate);
    }
    stats.loss = loss_sum / static_cast<double>(n_batches);

    // Epoch-level soft rates from one full forward pass with the current
    // parameters; Eafr then takes its penalty-only step from this point.
    const ForwardPass full = forward(result.model, all.x, all.n);
    try {
      const SoftRates rates =
          soft_group_rates_from_logits(full.spoof_logits, all.spoof, all.female);
      stats.fpr_gap = rates.fpr_f - rates.fpr_m;
      stats.fnr_gap = rates.fnr_f - rates.fnr_m;
      if (config.strategy == Strategy::Eafr) {
        stats.epoch_penalty = s2_penalty(rates, lambda_fair);
        const StepGradients pg = penalty_gradients(result.model, all, lambda_fair);
        sgd_update(result.model, pg, config.learning_rate);
      }
    } catch (const Error&) {
      if (config.strategy == Strategy::Eafr) throw;
      stats.fpr_gap = std::numeric_limits<double>::quiet_NaN();
      stats.fnr_gap = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.epochs.push_back(stats);
  }

  // Export: every record re-embedded, every trial rescored. The spoof logit
  // is spoof-high; negating logit and head restores the bonafide-high score
  // convention, and rescoring the export reproduces the scores bit for bit.
  const std::size_t n_rec = dataset.embeddings.size();
  std::vector<double> x_all(n_rec * d);
  for (std::size_t i = 0; i < n_rec; ++i) {
    const EmbeddingRecord& rec = dataset.embeddings[i];
    if (rec.vec.size() != d) {
      throw Error(Errc::DimensionMismatch,
                  "embedding dimension mismatch for '" + rec.utt_id + "'");
    }
    std::copy(rec.vec.begin(), rec.vec.end(), x_all.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  const ForwardPass fin = forward(result.model, x_all, n_rec);
  const auto emb = static_cast<std::size_t>(config.embed_width);

  result.exported.trials = dataset.trials;
  result.exported.embeddings.resize(n_rec);
  std::unordered_map<std::string, double> score_by_utt;
  score_by_utt.reserve(n_rec);
  for (std::size_t i = 0; i < n_rec; ++i) {
    EmbeddingRecord& out = result.exported.embeddings[i];
    out.utt_id = dataset.embeddings[i].utt_id;
    out.gender = dataset.embeddings[i].gender;
    out.label = dataset.embeddings[i].label;
    out.vec.assign(fin.embeddings.begin() + static_cast<std::ptrdiff_t>(i * emb),
                   fin.embeddings.begin() + static_cast<std::ptrdiff_t>((i + 1) * emb));
    score_by_utt.emplace(out.utt_id, -fin.spoof_logits[i]);
  }
  for (Trial& t : result.exported.trials) {
    const auto it = score_by_utt.find(t.utt_id);
    if (it == score_by_utt.end()) {
      throw Error(Errc::MissingEmbeddings, "no embedding record for trial '" + t.utt_id + "'");
    }
    t.score = it->second;
  }
  LinearHead head;
  head.weights.resize(emb);
  for (std::size_t j = 0; j < emb; ++j) head.weights[j] = -result.model.spoof_head.w[j];
  head.bias = -result.model.spoof_head.b[0];
  result.exported.head = head;
  return result;
}

double gradient_check(const MlpModel& model, const Batch& batch,
                      const TrainConfig& config) {
  validate(config);
  const double lambda_fair = resolved_lambda_fair(config);
  const double h = 1e-5;

  std::vector<double> weights_store;
  const std::vector<double>* weights = nullptr;
  if (config.strategy == Strategy::S1) {
    const CellTally cells = tally_cells(batch);
    const std::array<double, 4> w4 =
        s1_weights({cells.n[0], cells.n[1], cells.n[2], cells.n[3]});
    weights_store.resize(batch.n);
    for (std::size_t i = 0; i < batch.n; ++i) {
      const int c = (batch.female[i] == 1.0f ? 0 : 2) + (batch.spoof[i] == 1.0f ? 1 : 0);
      weights_store[i] = w4[static_cast<std::size_t>(c)];
    }
    weights = &weights_store;
  }

  // The |.| terms are only differentiable away from ties; insist on a
  // non-tie evaluation point for the penalised strategies.
  if (config.strategy == Strategy::S2 || config.strategy == Strategy::Eafr) {
    const ForwardPass f = forward(model, batch.x, batch.n);
    std::vector<double> probs(batch.n);
    for (std::size_t i = 0; i < batch.n; ++i) probs[i] = sigmoid(f.spoof_logits[i]);
    const SoftRates rates = soft_group_rates(probs, batch.spoof, batch.female);
    if (rates.fpr_f == rates.fpr_m || rates.fnr_f == rates.fnr_m) {
      throw Error(Errc::InvalidConfig, "gradient check requires a non-tie point");
    }
  }

  enum class Scalar { Spoof, SpoofPenalty, Penalty, Gender, SpoofMinusAdvGender };
  const auto evaluate = [&](const MlpModel& m, Scalar which) {
    const ForwardPass f = forward(m, batch.x, batch.n);
    const auto spoof_part = [&] { return bce_loss(f.spoof_logits, batch.spoof, weights); };
    const auto penalty_part = [&] {
      std::vector<double> probs(batch.n);
      for (std::size_t i = 0; i < batch.n; ++i) probs[i] = sigmoid(f.spoof_logits[i]);
      return s2_penalty(soft_group_rates(probs, batch.spoof, batch.female), lambda_fair);
    };
    const auto gender_part = [&] { return bce_loss(f.gender_logits, batch.female); };
    switch (which) {
      case Scalar::Spoof: return spoof_part();
      case Scalar::SpoofPenalty: return spoof_part() + penalty_part();
      case Scalar::Penalty: return penalty_part();
      case Scalar::Gender: return gender_part();
      default: return spoof_part() - config.lambda_adv * gender_part();
    }
  };

  double max_err = 0.0;
  MlpModel live = model;
  const auto check_layer = [&](const AffineLayer& analytic, AffineLayer& layer,
                               Scalar which) {
    const auto probe = [&](double& param, double analytic_g) {
      const double saved = param;
      param = saved + h;
      const double up = evaluate(live, which);
      param = saved - h;
      const double down = evaluate(live, which);
      param = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::fabs(analytic_g - numeric) /
                         std::max({std::fabs(analytic_g), std::fabs(numeric), 1e-4});
      max_err = std::max(max_err, err);
    };
    for (std::size_t i = 0; i < layer.w.size(); ++i) probe(layer.w[i], analytic.w[i]);
    for (std::size_t i = 0; i < layer.b.size(); ++i) probe(layer.b[i], analytic.b[i]);
  };

  const auto run = [&](const StepGradients& g, Scalar enc_scalar, bool gender_head) {
    check_layer(g.l1, live.l1, enc_scalar);
    check_layer(g.l2, live.l2, enc_scalar);
    check_layer(g.spoof_head, live.spoof_head, enc_scalar);
    if (gender_head) check_layer(g.gender_head, live.gender_head, Scalar::Gender);
  };

  switch (config.strategy) {
    case Strategy::Plain:
    case Strategy::S1: {
      run(strategy_gradients(model, batch, config, weights, nullptr), Scalar::Spoof,
          false);
      break;
    }
    case Strategy::S2: {
      run(strategy_gradients(model, batch, config, weights, nullptr),
          Scalar::SpoofPenalty, false);
      break;
    }
    case Strategy::S3: {
      run(strategy_gradients(model, batch, config, weights, nullptr),
          Scalar::SpoofMinusAdvGender, true);
      break;
    }
    default: {  // Eafr: the batch step is plain BCE, the epoch step penalty-only
      run(strategy_gradients(model, batch, config, weights, nullptr), Scalar::Spoof,
          false);
      run(penalty_gradients(model, batch, lambda_fair), Scalar::Penalty, false);
      break;
    }
  }
  return max_err;
}

}  // namespace fairgate
