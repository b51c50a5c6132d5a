#include "fairgate/commands.hpp"

#include <filesystem>
#include <ostream>

#include "fairgate/diagnosis.hpp"
#include "fairgate/io.hpp"
#include "fairgate/metrics.hpp"
#include "fairgate/postproc.hpp"
#include "fairgate/report.hpp"
#include "fairgate/synth.hpp"
#include "fairgate/trainer.hpp"

namespace fairgate {

namespace {

using nlohmann::ordered_json;

std::string out_path(const CommonOptions& common, const std::string& name) {
  std::filesystem::create_directories(common.out_dir);
  return (std::filesystem::path(common.out_dir) / name).string();
}

void write_output(const CommonOptions& common, const std::string& name,
                  const std::string& content, std::ostream& out) {
  const std::string path = out_path(common, name);
  atomic_write(path, content);
  out << "wrote " << path << "\n";
}

void write_manifest(const CommonOptions& common, const RunManifest& manifest,
                    std::ostream& out) {
  write_output(common, "manifest.json", manifest_json(manifest, true).dump(2) + "\n",
               out);
}

void add_input(RunManifest& manifest, const std::string& path) {
  manifest.inputs.emplace_back(path, fnv1a_hex(read_file(path)));
}

// Loads trials plus optional embeddings/head, flipping polarity if the input
// follows the spoof-high convention, and records input digests.
Dataset load_dataset(const std::string& trials_path,
                     const std::string& embeddings_path,
                     const std::string& head_path, const CommonOptions& common,
                     RunManifest& manifest) {
  Dataset dataset;
  dataset.trials = parse_trials(trials_path);
  add_input(manifest, trials_path);
  if (!embeddings_path.empty()) {
    dataset.embeddings = parse_embeddings(embeddings_path, dataset.trials);
    add_input(manifest, embeddings_path);
  }
  if (!head_path.empty()) {
    dataset.head = parse_head(head_path);
    add_input(manifest, head_path);
  }
  if (common.spoof_high) flip_polarity(dataset);
  return dataset;
}

ordered_json scenario_json(const ScenarioConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["n_per_cell"] = c.n_per_cell;
  j["embed_dim"] = c.embed_dim;
  j["score_bona"] = {{"mean", c.score_bona.mean}, {"stddev", c.score_bona.stddev}};
  j["score_spoof"] = {{"mean", c.score_spoof.mean}, {"stddev", c.score_spoof.stddev}};
  j["threshold_shift"] = c.threshold_shift;
  j["leak_mode"] = c.leak_mode == LeakMode::None
                       ? "none"
                       : (c.leak_mode == LeakMode::Localised ? "localised" : "diffuse");
  j["leak_dims"] = c.leak_dims;
  j["leak_strength"] = c.leak_strength;
  j["label_dims"] = c.label_dims;
  j["label_strength"] = c.label_strength;
  j["eval_spoof_ratio_f"] = c.eval_spoof_ratio_f;
  j["eval_spoof_ratio_m"] = c.eval_spoof_ratio_m;
  j["train_spoof_ratio_f"] = c.train_spoof_ratio_f;
  j["train_spoof_ratio_m"] = c.train_spoof_ratio_m;
  j["attacks_train"] = c.attacks_train;
  j["attacks_dev"] = c.attacks_dev;
  j["attacks_eval"] = c.attacks_eval;
  return j;
}

template <typename Fn>
int run_guarded(std::ostream& out, Fn&& body) {
  try {
    return body();
  } catch (const Error& e) {
    out << "error [" << to_string(e.code) << "]: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace

int cmd_synth(const SynthArgs& args, const CommonOptions& common, std::ostream& out) {
  return run_guarded(out, [&] {
    ScenarioConfig config = preset(args.preset);
    config.seed = common.seed;
    if (args.n_per_cell > 0) config.n_per_cell = static_cast<int>(args.n_per_cell);

    const auto [dataset, truth] = generate(config);

    write_trials(out_path(common, "trials.tsv"), dataset.trials);
    out << "wrote " << out_path(common, "trials.tsv") << "\n";
    write_embeddings(out_path(common, "embeddings.csv"), dataset.embeddings);
    out << "wrote " << out_path(common, "embeddings.csv") << "\n";
    write_head(out_path(common, "head.csv"), *dataset.head);
    out << "wrote " << out_path(common, "head.csv") << "\n";

    ordered_json gt;
    gt["version"] = kVersion;
    gt["preset"] = truth.preset;
    gt["seed"] = truth.seed;
    gt["injected"] = truth.injected;
    gt["config"] = scenario_json(truth.config);
    write_output(common, "ground_truth.json", gt.dump(2) + "\n", out);

    RunManifest manifest;
    manifest.command = "synth";
    manifest.seed = common.seed;
    manifest.options = {{"preset", args.preset}, {"n_per_cell", config.n_per_cell}};
    write_manifest(common, manifest, out);
    return kExitOk;
  });
}

int cmd_diagnose(const DiagnoseArgs& args, const CommonOptions& common,
                 std::ostream& out) {
  return run_guarded(out, [&] {
    RunManifest manifest;
    manifest.command = "diagnose";
    manifest.seed = common.seed;
    manifest.options = {{"polarity", common.spoof_high ? "spoof-high" : "bonafide-high"}};

    const Dataset dataset =
        load_dataset(args.trials, args.embeddings, "", common, manifest);
    for (const std::string& warning : validate(dataset)) {
      out << "note: " << warning << "\n";
    }

    DiagnosisConfig config;
    config.seed = common.seed;
    const DiagnosisReport report = diagnose_all(dataset, config);

    for (const CheckResult& check : report.checks) {
      out << check.level << "/" << check.id << ": " << to_string(check.status) << "\n";
    }

    write_output(common, "diagnosis.json", diagnosis_json(report, manifest).dump(2) + "\n",
                 out);
    write_output(common, "diagnosis.md", diagnosis_markdown(report), out);
    write_manifest(common, manifest, out);
    return report.any_confirmed ? kExitBiasConfirmed : kExitOk;
  });
}

int cmd_evaluate(const EvaluateArgs& args, const CommonOptions& common,
                 std::ostream& out) {
  return run_guarded(out, [&] {
    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.seed = common.seed;
    manifest.options = {{"strategy", args.grid ? "(grid)" : args.strategy},
                        {"grid", args.grid},
                        {"system_label", args.system_label},
                        {"suppress_k", args.suppress_k},
                        {"gnea_mode", args.gnea_shift ? "shift" : "align"},
                        {"eop", args.eop_true_positive ? "tpr" : "fpr"}};

    const Dataset dataset =
        load_dataset(args.trials, args.embeddings, args.head, common, manifest);

    PipelineOptions options;
    options.k = args.suppress_k;
    options.seed = common.seed;
    options.gnea_mode = args.gnea_shift ? SuppressMode::AlignShift : SuppressMode::Align;
    options.eop =
        args.eop_true_positive ? EopVariant::TruePositive : EopVariant::FalsePositive;

    std::vector<std::string> strategies;
    if (args.grid) {
      strategies = {args.system_label, args.system_label + "+tc"};
      if (dataset.has_embeddings() && dataset.head) {
        for (const char* s : {"sgfs", "gnea", "sgfs+tc", "gnea+tc"}) {
          strategies.emplace_back(s);
        }
      }
    } else {
      strategies = {args.strategy};
    }

    std::vector<PipelineResult> rows;
    rows.reserve(strategies.size());
    for (const std::string& strategy : strategies) {
      rows.push_back(run_pipeline(dataset, strategy, options));
      out << strategy << ": eer_gap=" << format_number(rows.back().report.eer_gap)
          << " d_fpr=" << format_number(rows.back().report.d_fpr) << "\n";
    }

    write_output(common, "fairness.json", fairness_json(rows, manifest).dump(2) + "\n",
                 out);
    write_output(common, "fairness.md", fairness_markdown(rows), out);
    write_manifest(common, manifest, out);
    return kExitOk;
  });
}

int cmd_calibrate(const CalibrateArgs& args, const CommonOptions& common,
                  std::ostream& out) {
  return run_guarded(out, [&] {
    RunManifest manifest;
    manifest.command = "calibrate";
    manifest.seed = common.seed;
    manifest.options = ordered_json::object();

    const Dataset dataset = load_dataset(args.trials, "", "", common, manifest);
    const std::vector<Trial> dev = trials_of_split(dataset.trials, Split::Dev);
    if (dev.empty()) {
      throw Error(Errc::MissingSplit, "no dev split: threshold calibration unavailable");
    }
    const ThresholdPair pair = calibrate_thresholds(dev);
    const EerResult pooled =
        eer(scores_of(dev, Label::Bonafide), scores_of(dev, Label::Spoof));

    ordered_json j;
    j["version"] = kVersion;
    j["threshold_f"] = pair.thr_f;
    j["threshold_m"] = pair.thr_m;
    j["eer_f"] = pair.eer_f;
    j["eer_m"] = pair.eer_m;
    j["pooled_threshold"] = pooled.threshold;
    j["pooled_eer"] = pooled.eer;
    j["manifest"] = manifest_json(manifest, false);
    write_output(common, "calibration.json", j.dump(2) + "\n", out);
    write_manifest(common, manifest, out);
    out << "threshold_f=" << format_number(pair.thr_f)
        << " threshold_m=" << format_number(pair.thr_m) << "\n";
    return kExitOk;
  });
}

int cmd_train(const TrainArgs& args, const CommonOptions& common, std::ostream& out) {
  return run_guarded(out, [&] {
    RunManifest manifest;
    manifest.command = "train";
    manifest.seed = common.seed;
    manifest.options = {{"strategy", args.strategy},
                        {"lambda_fair", args.lambda_fair},
                        {"lambda_adv", args.lambda_adv},
                        {"batch_size", args.batch_size},
                        {"epochs", args.epochs},
                        {"learning_rate", args.learning_rate},
                        {"hidden_width", args.hidden_width},
                        {"embed_width", args.embed_width}};

    const Dataset dataset =
        load_dataset(args.trials, args.embeddings, "", common, manifest);

    TrainConfig config;
    config.strategy = parse_training_strategy(args.strategy);
    config.lambda_fair = args.lambda_fair;
    config.lambda_adv = args.lambda_adv;
    config.batch_size = args.batch_size;
    config.epochs = args.epochs;
    config.learning_rate = args.learning_rate;
    config.seed = common.seed;
    config.hidden_width = args.hidden_width;
    config.embed_width = args.embed_width;

    const TrainResult result = train(dataset, config);

    write_trials(out_path(common, "trials.tsv"), result.exported.trials);
    out << "wrote " << out_path(common, "trials.tsv") << "\n";
    write_embeddings(out_path(common, "embeddings.csv"), result.exported.embeddings);
    out << "wrote " << out_path(common, "embeddings.csv") << "\n";
    write_head(out_path(common, "head.csv"), *result.exported.head);
    out << "wrote " << out_path(common, "head.csv") << "\n";
    write_output(common, "history.json", history_json(result.history).dump(2) + "\n",
                 out);
    write_manifest(common, manifest, out);

    const EpochStats& last = result.history.epochs.back();
    out << "final loss=" << format_number(last.loss)
        << " fpr_gap=" << format_number(last.fpr_gap) << "\n";
    return kExitOk;
  });
}

int cmd_report(const ReportArgs& args, const CommonOptions& common, std::ostream& out) {
  return run_guarded(out, [&] {
    RunManifest manifest;
    manifest.command = "report";
    manifest.seed = common.seed;
    manifest.options = {{"bins", args.bins}};

    const Dataset dataset = load_dataset(args.trials, "", "", common, manifest);
    write_output(common, "histograms.svg", render_histograms(dataset.trials, args.bins),
                 out);
    ordered_json j = score_summary_json(dataset.trials, args.bins);
    j["manifest"] = manifest_json(manifest, false);
    write_output(common, "score_summary.json", j.dump(2) + "\n", out);
    write_manifest(common, manifest, out);
    return kExitOk;
  });
}

}  // namespace fairgate
