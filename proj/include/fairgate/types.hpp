#ifndef FAIRGATE_TYPES_HPP
#define FAIRGATE_TYPES_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairgate {

enum class Label { Bonafide, Spoof };
enum class Gender { F, M };
enum class Split { Train, Dev, Eval };

const char* to_string(Label l);
const char* to_string(Gender g);
const char* to_string(Split s);

// One scored utterance. Scores follow the bonafide-high convention: a trial is
// predicted spoof iff score < threshold. attack_id is set iff label == Spoof.
struct Trial {
  std::string utt_id;
  double score = 0.0;
  Label label = Label::Bonafide;
  Gender gender = Gender::F;
  std::optional<std::string> attack_id;
  Split split = Split::Eval;
};

struct EmbeddingRecord {
  std::string utt_id;
  std::vector<double> vec;
  Gender gender = Gender::F;
  Label label = Label::Bonafide;
};

// Linear scorer over an embedding: score = dot(weights, vec) + bias.
struct LinearHead {
  std::vector<double> weights;
  double bias = 0.0;
};

struct Dataset {
  std::vector<Trial> trials;
  std::vector<EmbeddingRecord> embeddings;  // empty when not provided
  std::optional<LinearHead> head;

  bool has_embeddings() const { return !embeddings.empty(); }
  // Dimension of the embedding space, or 0 when no embeddings are loaded.
  int embed_dim() const {
    return embeddings.empty() ? 0 : static_cast<int>(embeddings.front().vec.size());
  }
};

enum class Errc {
  MalformedRow,
  DuplicateUttId,
  InvalidEnum,
  UnknownUttId,
  RaggedRow,
  NonFiniteValue,
  EmptyGroup,
  EmptyClass,
  MissingLabelInGroup,
  ZeroMarginal,
  SingleGender,
  ZeroTotalMass,
  KTooLarge,
  DimensionMismatch,
  MissingEmbeddings,
  MissingHead,
  MissingSplit,
  EmptyCell,
  NanLoss,
  UnknownStrategy,
  UnknownPreset,
  InvalidConfig,
  IoError,
};

const char* to_string(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, long line = -1)
      : std::runtime_error(message), code(code), line(line) {}

  Errc code;
  long line;  // 1-based input line when the error is tied to a file, else -1
};

}  // namespace fairgate

#endif  // FAIRGATE_TYPES_HPP
