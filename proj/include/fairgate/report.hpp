#ifndef FAIRGATE_REPORT_HPP
#define FAIRGATE_REPORT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairgate/diagnosis.hpp"
#include "fairgate/postproc.hpp"
#include "fairgate/trainer.hpp"
#include "fairgate/types.hpp"

namespace fairgate {

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a 64-bit digest, 16 hex characters; used to fingerprint input files.
std::string fnv1a_hex(const std::string& bytes);

// Everything needed to reproduce a run: the command, its option snapshot,
// the seed, and a digest per input file. The timestamp is kept out of the
// embedded form so report bytes stay reproducible; the standalone
// manifest.json carries it.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::ordered_json options;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
};

nlohmann::ordered_json manifest_json(const RunManifest& manifest,
                                     bool with_timestamp);

nlohmann::ordered_json diagnosis_json(const DiagnosisReport& report,
                                      const RunManifest& manifest);
std::string diagnosis_markdown(const DiagnosisReport& report);

nlohmann::ordered_json fairness_json(const std::vector<PipelineResult>& rows,
                                     const RunManifest& manifest);
std::string fairness_markdown(const std::vector<PipelineResult>& rows);

nlohmann::ordered_json history_json(const TrainHistory& history);

// 2x2 histogram panel (rows = gender, columns = label) over shared bins.
// Deterministic bytes for identical input. Throws EmptyGroup when a gender
// has no trials.
std::string render_histograms(const std::vector<Trial>& trials, int bins = 40);

nlohmann::ordered_json score_summary_json(const std::vector<Trial>& trials,
                                          int bins = 40);

}  // namespace fairgate

#endif  // FAIRGATE_REPORT_HPP
