#include "fairgate/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fairgate {

namespace {

const char* kTrialHeader = "utt_id\tscore\tlabel\tgender\tattack\tsplit";

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Strict full-token double parse; rejects empty, partial and non-finite input.
bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Label parse_label(const std::string& s, long line_no) {
  const std::string v = lower(s);
  if (v == "bonafide") return Label::Bonafide;
  if (v == "spoof") return Label::Spoof;
  throw Error(Errc::InvalidEnum, "line " + std::to_string(line_no) +
                                     ": invalid label '" + s + "'", line_no);
}

Gender parse_gender(const std::string& s, long line_no) {
  if (s == "F" || s == "f") return Gender::F;
  if (s == "M" || s == "m") return Gender::M;
  throw Error(Errc::InvalidEnum, "line " + std::to_string(line_no) +
                                     ": invalid gender '" + s + "'", line_no);
}

Split parse_split(const std::string& s, long line_no) {
  const std::string v = lower(s);
  if (v == "train") return Split::Train;
  if (v == "dev") return Split::Dev;
  if (v == "eval") return Split::Eval;
  throw Error(Errc::InvalidEnum, "line " + std::to_string(line_no) +
                                     ": invalid split '" + s + "'", line_no);
}

void chop_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

const char* to_string(Label l) { return l == Label::Bonafide ? "bonafide" : "spoof"; }
const char* to_string(Gender g) { return g == Gender::F ? "F" : "M"; }
const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    default: return "eval";
  }
}

const char* to_string(Errc c) {
  switch (c) {
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::DuplicateUttId: return "DuplicateUttId";
    case Errc::InvalidEnum: return "InvalidEnum";
    case Errc::UnknownUttId: return "UnknownUttId";
    case Errc::RaggedRow: return "RaggedRow";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::MissingLabelInGroup: return "MissingLabelInGroup";
    case Errc::ZeroMarginal: return "ZeroMarginal";
    case Errc::SingleGender: return "SingleGender";
    case Errc::ZeroTotalMass: return "ZeroTotalMass";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::MissingEmbeddings: return "MissingEmbeddings";
    case Errc::MissingHead: return "MissingHead";
    case Errc::MissingSplit: return "MissingSplit";
    case Errc::EmptyCell: return "EmptyCell";
    case Errc::NanLoss: return "NanLoss";
    case Errc::UnknownStrategy: return "UnknownStrategy";
    case Errc::UnknownPreset: return "UnknownPreset";
    case Errc::InvalidConfig: return "InvalidConfig";
    default: return "IoError";
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot open " + tmp + " for writing");
    out << content;
    if (!out) throw Error(Errc::IoError, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "rename failed for " + path + ": " + ec.message());
}

std::vector<Trial> parse_trials(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::MalformedRow, path + ": empty file", 1);
  }
  chop_cr(line);
  if (line != kTrialHeader) {
    throw Error(Errc::MalformedRow, path + ": bad header, expected '" +
                                        std::string(kTrialHeader) + "'", 1);
  }

  std::vector<Trial> trials;
  std::unordered_set<std::string> seen;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    chop_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cols = split_on(line, '\t');
    if (cols.size() != 6) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) +
                                          ": expected 6 columns, got " +
                                          std::to_string(cols.size()), line_no);
    }
    Trial t;
    t.utt_id = cols[0];
    if (t.utt_id.empty()) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": empty utt_id",
                  line_no);
    }
    if (!seen.insert(t.utt_id).second) {
      throw Error(Errc::DuplicateUttId, "line " + std::to_string(line_no) +
                                            ": duplicate utt_id '" + t.utt_id + "'", line_no);
    }
    if (!parse_double(cols[1], t.score)) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) +
                                          ": unparseable score '" + cols[1] + "'", line_no);
    }
    t.label = parse_label(cols[2], line_no);
    t.gender = parse_gender(cols[3], line_no);
    const std::string& attack = cols[4];
    if (t.label == Label::Spoof) {
      if (attack == "-" || attack.empty()) {
        throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) +
                                            ": spoof row without attack id", line_no);
      }
      t.attack_id = attack;
    } else {
      if (attack != "-") {
        throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) +
                                            ": bonafide row with attack id '" + attack + "'",
                    line_no);
      }
    }
    t.split = parse_split(cols[5], line_no);
    trials.push_back(std::move(t));
  }
  return trials;
}

void write_trials(const std::string& path, const std::vector<Trial>& trials) {
  std::ostringstream out;
  out << kTrialHeader << '\n';
  for (const Trial& t : trials) {
    out << t.utt_id << '\t' << format_number(t.score) << '\t' << to_string(t.label) << '\t'
        << to_string(t.gender) << '\t' << (t.attack_id ? *t.attack_id : std::string("-"))
        << '\t' << to_string(t.split) << '\n';
  }
  atomic_write(path, out.str());
}

std::vector<EmbeddingRecord> parse_embeddings(const std::string& path,
                                              const std::vector<Trial>& trials) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);

  std::unordered_map<std::string, const Trial*> by_id;
  by_id.reserve(trials.size());
  for (const Trial& t : trials) by_id.emplace(t.utt_id, &t);

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::MalformedRow, path + ": empty file", 1);
  }
  chop_cr(line);
  const std::vector<std::string> header = split_on(line, ',');
  if (header.size() < 2 || header[0] != "utt_id") {
    throw Error(Errc::MalformedRow, path + ": bad embedding header", 1);
  }
  const std::size_t dim = header.size() - 1;

  std::vector<EmbeddingRecord> out;
  std::unordered_set<std::string> seen;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    chop_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cols = split_on(line, ',');
    if (cols.size() != dim + 1) {
      throw Error(Errc::RaggedRow, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(dim + 1) + " columns, got " +
                                       std::to_string(cols.size()), line_no);
    }
    EmbeddingRecord rec;
    rec.utt_id = cols[0];
    if (!seen.insert(rec.utt_id).second) {
      throw Error(Errc::DuplicateUttId, "line " + std::to_string(line_no) +
                                            ": duplicate utt_id '" + rec.utt_id + "'", line_no);
    }
    const auto it = by_id.find(rec.utt_id);
    if (it == by_id.end()) {
      throw Error(Errc::UnknownUttId, "line " + std::to_string(line_no) +
                                          ": utt_id '" + rec.utt_id +
                                          "' not present in trial list", line_no);
    }
    rec.gender = it->second->gender;
    rec.label = it->second->label;
    rec.vec.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      if (!parse_double(cols[d + 1], rec.vec[d])) {
        throw Error(Errc::NonFiniteValue, "line " + std::to_string(line_no) + ", column " +
                                              std::to_string(d + 2) +
                                              ": non-finite or unparseable value '" +
                                              cols[d + 1] + "'", line_no);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_embeddings(const std::string& path,
                      const std::vector<EmbeddingRecord>& embeddings) {
  std::ostringstream out;
  out << "utt_id";
  const std::size_t dim = embeddings.empty() ? 0 : embeddings.front().vec.size();
  for (std::size_t d = 0; d < dim; ++d) out << ",e" << d;
  out << '\n';
  for (const EmbeddingRecord& rec : embeddings) {
    if (rec.vec.size() != dim) {
      throw Error(Errc::RaggedRow, "embedding for '" + rec.utt_id + "' has dimension " +
                                       std::to_string(rec.vec.size()) + ", expected " +
                                       std::to_string(dim));
    }
    out << rec.utt_id;
    for (const double v : rec.vec) out << ',' << format_number(v);
    out << '\n';
  }
  atomic_write(path, out.str());
}

LinearHead parse_head(const std::string& path) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  std::string row;
  long row_line = 0;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    chop_cr(line);
    if (line.empty()) continue;
    if (!row.empty()) {
      throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) +
                                          ": head file must contain a single row", line_no);
    }
    row = line;
    row_line = line_no;
  }
  if (row.empty()) throw Error(Errc::MalformedRow, path + ": empty head file", 1);

  const std::vector<std::string> cols = split_on(row, ',');
  if (cols.size() < 2) {
    throw Error(Errc::MalformedRow, "line " + std::to_string(row_line) +
                                        ": head row needs at least one weight and a bias",
                row_line);
  }
  LinearHead head;
  head.weights.resize(cols.size() - 1);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    double v = 0.0;
    if (!parse_double(cols[i], v)) {
      throw Error(Errc::NonFiniteValue, "line " + std::to_string(row_line) + ", column " +
                                            std::to_string(i + 1) +
                                            ": non-finite or unparseable value '" + cols[i] +
                                            "'", row_line);
    }
    if (i + 1 < cols.size()) {
      head.weights[i] = v;
    } else {
      head.bias = v;
    }
  }
  return head;
}

void write_head(const std::string& path, const LinearHead& head) {
  std::ostringstream out;
  for (const double w : head.weights) out << format_number(w) << ',';
  out << format_number(head.bias) << '\n';
  atomic_write(path, out.str());
}

std::vector<std::string> validate(const Dataset& dataset) {
  std::vector<std::string> warnings;

  bool split_present[3] = {false, false, false};
  long cell[3][2][2] = {};
  for (const Trial& t : dataset.trials) {
    const int s = static_cast<int>(t.split);
    split_present[s] = true;
    ++cell[s][static_cast<int>(t.gender)][static_cast<int>(t.label)];
  }

  if (!split_present[static_cast<int>(Split::Train)]) {
    warnings.push_back("no train split: training-balance check unavailable");
  }
  if (!split_present[static_cast<int>(Split::Dev)]) {
    warnings.push_back("no dev split: threshold calibration unavailable");
  }
  if (!split_present[static_cast<int>(Split::Eval)]) {
    warnings.push_back("no eval split: evaluation metrics unavailable");
  }

  for (int s = 0; s < 3; ++s) {
    if (!split_present[s]) continue;
    for (int g = 0; g < 2; ++g) {
      for (int l = 0; l < 2; ++l) {
        if (cell[s][g][l] == 0) {
          warnings.push_back(std::string(to_string(static_cast<Split>(s))) +
                             " split: empty cell (" + to_string(static_cast<Gender>(g)) +
                             ", " + to_string(static_cast<Label>(l)) + ")");
        }
      }
    }
  }

  if (dataset.has_embeddings()) {
    std::unordered_set<std::string> with_emb;
    with_emb.reserve(dataset.embeddings.size());
    for (const EmbeddingRecord& rec : dataset.embeddings) with_emb.insert(rec.utt_id);
    long missing = 0;
    for (const Trial& t : dataset.trials) {
      if (!with_emb.count(t.utt_id)) ++missing;
    }
    if (missing > 0) {
      warnings.push_back(std::to_string(missing) + " trial(s) without embeddings");
    }
    if (dataset.head &&
        dataset.head->weights.size() != static_cast<std::size_t>(dataset.embed_dim())) {
      warnings.push_back("head dimension " + std::to_string(dataset.head->weights.size()) +
                         " does not match embedding dimension " +
                         std::to_string(dataset.embed_dim()));
    }
  }

  return warnings;
}

void flip_polarity(Dataset& dataset) {
  for (Trial& t : dataset.trials) t.score = -t.score;
  if (dataset.head) {
    for (double& w : dataset.head->weights) w = -w;
    dataset.head->bias = -dataset.head->bias;
  }
}

}  // namespace fairgate
