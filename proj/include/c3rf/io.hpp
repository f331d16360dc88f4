#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "c3rf/candidates.hpp"
#include "c3rf/graph.hpp"
#include "c3rf/hamming.hpp"
#include "c3rf/infer.hpp"
#include "c3rf/predict.hpp"
#include "c3rf/tune.hpp"

namespace c3rf {

// Shortest round-trip decimal form; infinities print as "inf"/"-inf".
std::string format_double(double x);

// Provenance stamp carried by every output file: a "# tool version command"
// line for CSV, a "_meta" object for JSON.
struct ToolMeta {
  std::string command;
  std::optional<std::uint64_t> seed;
};

nlohmann::json meta_json(const ToolMeta& meta);
std::string csv_meta_line(const ToolMeta& meta);

// Graph files: {"variables": [cardinalities], "factors": [{"scope", "log_table"}],
// "temperature"}. -inf round-trips as the string "-inf"; finite values are
// value-exact.
nlohmann::json model_to_json(const GibbsModel& model);
GibbsModel model_from_json(const nlohmann::json& j);

// Candidate files are loadable without a model; when one is supplied, stored
// scores are verified against it and mismatches warn on the given stream.
nlohmann::json candidates_to_json(const CandidateSet& set);
CandidateSet candidates_from_json(const nlohmann::json& j, const GibbsModel* model = nullptr,
                                  std::ostream* warnings = nullptr);

nlohmann::json marginals_to_json(const Marginals& m);
nlohmann::json posterior_to_json(const ConstrainedPosterior& p);
nlohmann::json prediction_to_json(const Prediction& p);

nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& j);

// File helpers; missing files raise file_not_found, malformed content
// parse_error.
nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);
void save_text_file(const std::string& path, const std::string& text);

GibbsModel load_model_file(const std::string& path);
CandidateSet load_candidates_file(const std::string& path, const GibbsModel* model = nullptr,
                                  std::ostream* warnings = nullptr);
Corpus load_corpus_file(const std::string& path);

}  // namespace c3rf
