#include "fairgate/report.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>

#include "fairgate/io.hpp"
#include "fairgate/metrics.hpp"

namespace fairgate {

namespace {

using nlohmann::ordered_json;

std::string fixed(double value, int decimals, bool forced_sign = false) {
  if (!std::isfinite(value)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), forced_sign ? "%+.*f" : "%.*f", decimals, value);
  return buf;
}

// JSON numbers carry full precision; NaN/inf have no JSON encoding, so they
// are stored as null alongside the degenerate-denominator flags.
ordered_json num(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

const char* status_display(CheckStatus s) {
  switch (s) {
    case CheckStatus::Confirmed: return "Confirmed";
    case CheckStatus::Weak: return "Weak";
    default: return "Ruled out";
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ordered_json manifest_json(const RunManifest& manifest, bool with_timestamp) {
  ordered_json j;
  j["command"] = manifest.command;
  j["version"] = kVersion;
  j["seed"] = manifest.seed;
  j["options"] = manifest.options.is_null() ? ordered_json::object() : manifest.options;
  ordered_json inputs = ordered_json::object();
  for (const auto& [path, digest] : manifest.inputs) inputs[path] = digest;
  j["inputs"] = inputs;
  if (with_timestamp) {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    j["timestamp"] = buf;
  }
  return j;
}

ordered_json diagnosis_json(const DiagnosisReport& report,
                            const RunManifest& manifest) {
  ordered_json j;
  j["version"] = kVersion;
  ordered_json checks = ordered_json::array();
  for (const CheckResult& check : report.checks) {
    ordered_json c;
    c["id"] = check.id;
    c["level"] = check.level;
    c["name"] = check.name;
    c["status"] = to_string(check.status);
    c["statistic"] = check.statistic_text;
    ordered_json stats = ordered_json::object();
    for (const auto& [key, value] : check.stats) stats[key] = num(value);
    c["stats"] = stats;
    c["evidence"] = check.evidence;
    checks.push_back(std::move(c));
  }
  j["checks"] = checks;
  ordered_json recs = ordered_json::array();
  for (const Recommendation& rec : report.recommendations) {
    ordered_json r;
    r["source"] = rec.source;
    r["strategies"] = rec.strategies;
    r["note"] = rec.note;
    recs.push_back(std::move(r));
  }
  j["recommendations"] = recs;
  j["any_confirmed"] = report.any_confirmed;
  j["exit_code"] = report.any_confirmed ? 2 : 0;
  j["manifest"] = manifest_json(manifest, false);
  return j;
}

std::string diagnosis_markdown(const DiagnosisReport& report) {
  std::string md = "# Bias diagnosis\n\n";
  md += "| Level | Source | Statistic | Status |\n";
  md += "|---|---|---|---|\n";
  for (const CheckResult& check : report.checks) {
    md += "| " + check.level + " | " + check.name + " | " + check.statistic_text +
          " | " + status_display(check.status) + " |\n";
  }
  md += "\n## Recommendations\n\n";
  if (report.recommendations.empty()) {
    md += "No bias source confirmed; no mitigation recommended.\n";
  } else {
    for (const Recommendation& rec : report.recommendations) {
      std::string strategies;
      for (const std::string& s : rec.strategies) {
        if (!strategies.empty()) strategies += ", ";
        strategies += s;
      }
      if (strategies.empty()) strategies = "none";
      md += "- **" + rec.source + "** -> " + strategies;
      if (!rec.note.empty()) md += " (" + rec.note + ")";
      md += "\n";
    }
  }
  return md;
}

ordered_json fairness_json(const std::vector<PipelineResult>& rows,
                           const RunManifest& manifest) {
  ordered_json j;
  j["version"] = kVersion;
  ordered_json out_rows = ordered_json::array();
  for (const PipelineResult& row : rows) {
    ordered_json r;
    r["strategy"] = row.strategy;
    r["eer_f"] = num(row.report.eer_f);
    r["eer_m"] = num(row.report.eer_m);
    r["eer_gap"] = num(row.report.eer_gap);
    r["d_fpr"] = num(row.report.d_fpr);
    r["spd"] = num(row.report.spd);
    r["eop"] = num(row.report.eop);
    r["ppd"] = num(row.report.ppd);
    r["ted"] = num(row.report.ted);
    r["threshold_f"] = num(row.threshold_f);
    r["threshold_m"] = num(row.threshold_m);
    r["per_gender_thresholds"] = row.per_gender_thresholds;
    r["suppressed_dims"] = row.suppressed_dims;
    r["flags"] = row.report.flags;
    r["notes"] = row.notes;
    out_rows.push_back(std::move(r));
  }
  j["rows"] = out_rows;
  j["manifest"] = manifest_json(manifest, false);
  return j;
}

std::string fairness_markdown(const std::vector<PipelineResult>& rows) {
  std::string md = "# Fairness evaluation\n\n";
  md += "| Strategy | EER F% | EER M% | EER Gap | d_FPR | SPD | EOP | PPD | TED |\n";
  md += "|---|---|---|---|---|---|---|---|---|\n";
  for (const PipelineResult& row : rows) {
    md += "| " + row.strategy;
    md += " | " + fixed(100.0 * row.report.eer_f, 2);
    md += " | " + fixed(100.0 * row.report.eer_m, 2);
    md += " | " + fixed(100.0 * row.report.eer_gap, 2);
    md += " | " + fixed(row.report.d_fpr, 3, true);
    md += " | " + fixed(row.report.spd, 3, true);
    md += " | " + fixed(row.report.eop, 3, true);
    md += " | " + fixed(row.report.ppd, 3, true);
    md += " | " + fixed(row.report.ted, 3, true);
    md += " |\n";
  }
  bool any_flags = false;
  for (const PipelineResult& row : rows) any_flags = any_flags || !row.report.flags.empty();
  if (any_flags) {
    md += "\n";
    for (const PipelineResult& row : rows) {
      if (row.report.flags.empty()) continue;
      std::string flags;
      for (const std::string& f : row.report.flags) {
        if (!flags.empty()) flags += ", ";
        flags += f;
      }
      md += "- " + row.strategy + ": undefined metrics (" + flags + ")\n";
    }
  }
  return md;
}

ordered_json history_json(const TrainHistory& history) {
  ordered_json j;
  j["version"] = kVersion;
  j["strategy"] = history.strategy;
  ordered_json epochs = ordered_json::array();
  for (const EpochStats& e : history.epochs) {
    ordered_json row;
    row["loss"] = num(e.loss);
    row["fpr_gap"] = num(e.fpr_gap);
    row["fnr_gap"] = num(e.fnr_gap);
    row["epoch_penalty"] = num(e.epoch_penalty);
    row["skipped_batches"] = e.skipped_batches;
    epochs.push_back(std::move(row));
  }
  j["epochs"] = epochs;
  return j;
}

std::string render_histograms(const std::vector<Trial>& trials, int bins) {
  bool has_f = false, has_m = false;
  for (const Trial& t : trials) (t.gender == Gender::F ? has_f : has_m) = true;
  if (!has_f || !has_m) {
    throw Error(Errc::EmptyGroup, std::string("no trials for gender ") +
                                      (has_f ? "M" : "F"));
  }
  const ScoreSummary summary = score_summary(trials, bins);

  // Fixed layout: 2x2 grid of panels, bars normalised to each panel's peak.
  const double panel_w = 360.0, panel_h = 220.0;
  const double margin = 40.0, gap = 40.0, label_h = 24.0;
  const double width = margin * 2 + panel_w * 2 + gap;
  const double height = margin * 2 + (panel_h + label_h) * 2 + gap;

  std::string svg;
  char buf[256];
  const auto add = [&](const char* format, auto... args) {
    std::snprintf(buf, sizeof(buf), format, args...);
    svg += buf;
  };

  add("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %.2f %.2f\">\n",
      width, height);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  static const char* kGenderName[2] = {"Female", "Male"};
  static const char* kLabelName[2] = {"bonafide", "spoof"};
  static const char* kFill[2] = {"#4878a8", "#c05050"};  // bonafide, spoof

  for (int g = 0; g < 2; ++g) {
    for (int l = 0; l < 2; ++l) {
      const CellSummary& cell = summary.cell[g][l];
      const double x0 = margin + l * (panel_w + gap);
      const double y0 = margin + g * (panel_h + label_h + gap) + label_h;

      add("<text x=\"%.2f\" y=\"%.2f\" font-family=\"monospace\" font-size=\"14\">"
          "%s / %s (n=%ld)</text>\n",
          x0, y0 - 8.0, kGenderName[g], kLabelName[l], cell.n);
      add("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
          "fill=\"none\" stroke=\"#888888\"/>\n",
          x0, y0, panel_w, panel_h);

      long peak = 0;
      for (const long c : cell.histogram) peak = std::max(peak, c);
      if (peak == 0) continue;
      const double bar_w = panel_w / static_cast<double>(bins);
      for (int b = 0; b < bins; ++b) {
        const long count = cell.histogram[static_cast<std::size_t>(b)];
        if (count == 0) continue;
        const double bar_h =
            panel_h * static_cast<double>(count) / static_cast<double>(peak);
        add("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
            "fill=\"%s\"/>\n",
            x0 + b * bar_w, y0 + panel_h - bar_h, bar_w, bar_h, kFill[l]);
      }
      add("<text x=\"%.2f\" y=\"%.2f\" font-family=\"monospace\" font-size=\"11\">"
          "%s</text>\n",
          x0, y0 + panel_h + 14.0, format_number(summary.lo).c_str());
      add("<text x=\"%.2f\" y=\"%.2f\" font-family=\"monospace\" font-size=\"11\" "
          "text-anchor=\"end\">%s</text>\n",
          x0 + panel_w, y0 + panel_h + 14.0, format_number(summary.hi).c_str());
    }
  }
  svg += "</svg>\n";
  return svg;
}

ordered_json score_summary_json(const std::vector<Trial>& trials, int bins) {
  const ScoreSummary summary = score_summary(trials, bins);
  ordered_json j;
  j["version"] = kVersion;
  j["lo"] = num(summary.lo);
  j["hi"] = num(summary.hi);
  j["bins"] = summary.bins;
  static const char* kCellKey[2][2] = {{"f_bonafide", "f_spoof"},
                                       {"m_bonafide", "m_spoof"}};
  ordered_json cells = ordered_json::object();
  for (int g = 0; g < 2; ++g) {
    for (int l = 0; l < 2; ++l) {
      const CellSummary& cell = summary.cell[g][l];
      ordered_json c;
      c["n"] = cell.n;
      c["mean"] = num(cell.mean);
      c["stddev"] = num(cell.stddev);
      c["histogram"] = cell.histogram;
      cells[kCellKey[g][l]] = std::move(c);
    }
  }
  j["cells"] = cells;
  return j;
}

}  // namespace fairgate
