#ifndef FAIRGATE_IO_HPP
#define FAIRGATE_IO_HPP

#include <string>
#include <vector>

#include "fairgate/types.hpp"

namespace fairgate {

// Trial list TSV. Header is exactly:
//   utt_id\tscore\tlabel\tgender\tattack\tsplit
// attack is "-" for bonafide rows and an attack id for spoof rows.
std::vector<Trial> parse_trials(const std::string& path);
void write_trials(const std::string& path, const std::vector<Trial>& trials);

// Embedding CSV with header utt_id,e0,...,e{D-1}; D is inferred from the
// header. Gender and label are joined from the trial list by utt_id.
std::vector<EmbeddingRecord> parse_embeddings(const std::string& path,
                                              const std::vector<Trial>& trials);
void write_embeddings(const std::string& path,
                      const std::vector<EmbeddingRecord>& embeddings);

// Linear head CSV: a single row w0,...,w{D-1},bias.
LinearHead parse_head(const std::string& path);
void write_head(const std::string& path, const LinearHead& head);

// Non-fatal dataset review: empty gender/label cells, missing splits, trials
// without embeddings, head/embedding dimension mismatch. Never mutates.
std::vector<std::string> validate(const Dataset& dataset);

// Negate scores (and head, when present) to convert a spoof-high score file to
// the internal bonafide-high convention.
void flip_polarity(Dataset& dataset);

// All file output goes through this: write to <path>.tmp, then rename.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Fixed float formatting used by every writer (6 significant digits).
std::string format_number(double v);

}  // namespace fairgate

#endif  // FAIRGATE_IO_HPP
