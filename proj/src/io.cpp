#include "c3rf/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "c3rf/logspace.hpp"
#include "c3rf/version.hpp"

namespace c3rf {

namespace {

using nlohmann::json;

// Log-potentials may be -inf, which JSON numbers cannot carry; those entries
// travel as the string "-inf". Finite values stay native numbers so the
// library's shortest-round-trip printing keeps them value-exact.
json encode_double(double x) {
  if (is_neg_inf(x)) return json("-inf");
  return json(x);
}

double decode_double(const json& j, const char* where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string() && j.get<std::string>() == "-inf") return kNegInf;
  fail(ErrorCode::parse_error, std::string(where) + ": expected a number or \"-inf\"");
}

const json& member(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::parse_error, std::string("missing key \"") + key + "\"");
  return *it;
}

std::vector<int> int_list(const json& j, const char* where) {
  if (!j.is_array()) fail(ErrorCode::parse_error, std::string(where) + ": expected an array");
  std::vector<int> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_integer()) fail(ErrorCode::parse_error, std::string(where) + ": expected integers");
    out.push_back(v.get<int>());
  }
  return out;
}

json probability_rows(const NodeMarginals& node) {
  json rows = json::array();
  for (const auto& row : node) {
    json r = json::array();
    for (double p : row) r.push_back(p);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

json meta_json(const ToolMeta& meta) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["command"] = meta.command;
  if (meta.seed) j["seed"] = *meta.seed;
  return j;
}

std::string csv_meta_line(const ToolMeta& meta) {
  std::ostringstream os;
  os << "# " << kToolName << " " << kVersion << " " << meta.command;
  if (meta.seed) os << " seed=" << *meta.seed;
  return os.str();
}

json model_to_json(const GibbsModel& model) {
  json j;
  json vars = json::array();
  for (const auto& v : model.graph.variables) vars.push_back(v.cardinality);
  j["variables"] = std::move(vars);
  json factors = json::array();
  for (const auto& f : model.graph.factors) {
    json jf;
    json scope = json::array();
    for (int v : f.scope) scope.push_back(v);
    jf["scope"] = std::move(scope);
    json table = json::array();
    for (double x : f.table) table.push_back(encode_double(x));
    jf["log_table"] = std::move(table);
    factors.push_back(std::move(jf));
  }
  j["factors"] = std::move(factors);
  j["temperature"] = model.temperature;
  return j;
}

GibbsModel model_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::parse_error, "model: expected an object");
  std::vector<VariableSpec> vars;
  {
    const json& jv = member(j, "variables");
    if (!jv.is_array()) fail(ErrorCode::parse_error, "variables: expected an array");
    int id = 0;
    for (const auto& v : jv) {
      if (!v.is_number_integer()) fail(ErrorCode::parse_error, "variables: expected integers");
      vars.push_back({id++, v.get<int>()});
    }
  }
  std::vector<FactorSpec> factors;
  {
    const json& jf = member(j, "factors");
    if (!jf.is_array()) fail(ErrorCode::parse_error, "factors: expected an array");
    int id = 0;
    for (const auto& f : jf) {
      if (!f.is_object()) fail(ErrorCode::parse_error, "factor: expected an object");
      FactorSpec spec;
      spec.id = id++;
      spec.scope = int_list(member(f, "scope"), "scope");
      const json& jt = member(f, "log_table");
      if (!jt.is_array()) fail(ErrorCode::parse_error, "log_table: expected an array");
      spec.table.reserve(jt.size());
      for (const auto& x : jt) spec.table.push_back(decode_double(x, "log_table"));
      factors.push_back(std::move(spec));
    }
  }
  const json& jt = member(j, "temperature");
  if (!jt.is_number()) fail(ErrorCode::parse_error, "temperature: expected a number");
  return make_model(build_graph(vars, factors), jt.get<double>());
}

json candidates_to_json(const CandidateSet& set) {
  json j;
  j["lambda"] = set.lambda;
  j["heuristic_map"] = set.heuristic_map;
  json items = json::array();
  for (const auto& c : set.items) {
    json jc;
    json labels = json::array();
    for (int y : c.labels) labels.push_back(y);
    jc["labels"] = std::move(labels);
    jc["score"] = encode_double(c.score);
    jc["weight"] = c.weight;
    items.push_back(std::move(jc));
  }
  j["candidates"] = std::move(items);
  return j;
}

CandidateSet candidates_from_json(const json& j, const GibbsModel* model, std::ostream* warnings) {
  if (!j.is_object()) fail(ErrorCode::parse_error, "candidates: expected an object");
  CandidateSet set;
  const json& jl = member(j, "lambda");
  if (!jl.is_number()) fail(ErrorCode::parse_error, "lambda: expected a number");
  set.lambda = jl.get<double>();
  const json& jh = member(j, "heuristic_map");
  if (!jh.is_boolean()) fail(ErrorCode::parse_error, "heuristic_map: expected a boolean");
  set.heuristic_map = jh.get<bool>();
  const json& jc = member(j, "candidates");
  if (!jc.is_array()) fail(ErrorCode::parse_error, "candidates: expected an array");
  int index = 0;
  for (const auto& item : jc) {
    if (!item.is_object()) fail(ErrorCode::parse_error, "candidate: expected an object");
    Candidate c;
    c.labels = int_list(member(item, "labels"), "labels");
    c.score = decode_double(member(item, "score"), "score");
    const json& jw = member(item, "weight");
    if (!jw.is_number()) fail(ErrorCode::parse_error, "weight: expected a number");
    c.weight = jw.get<double>();
    if (model) {
      validate_configuration(model->graph, c.labels);
      const double recomputed = score(*model, c.labels);
      if (warnings && recomputed != c.score) {
        *warnings << "warning: candidate " << index << " stored score " << format_double(c.score)
                  << " differs from recomputed " << format_double(recomputed) << "\n";
      }
    }
    set.items.push_back(std::move(c));
    ++index;
  }
  return set;
}

json marginals_to_json(const Marginals& m) {
  json j;
  j["marginals"] = probability_rows(m.node);
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  return j;
}

json posterior_to_json(const ConstrainedPosterior& p) {
  json j;
  j["log_mass"] = encode_double(p.log_mass);
  j["marginals"] = probability_rows(p.node_marginals);
  j["converged"] = p.converged;
  return j;
}

json prediction_to_json(const Prediction& p) {
  json j;
  json chosen = json::array();
  for (int y : p.chosen) chosen.push_back(y);
  j["chosen"] = std::move(chosen);
  j["chosen_index"] = p.chosen_index;
  json obj = json::array();
  for (double v : p.objective_values) obj.push_back(encode_double(v));
  j["objective_values"] = std::move(obj);
  json lw = json::array();
  for (double v : p.log_weights) lw.push_back(encode_double(v));
  j["log_weights"] = std::move(lw);
  json conv = json::array();
  for (bool b : p.converged) conv.push_back(b);
  j["converged"] = std::move(conv);
  j["backend"] = p.backend;
  return j;
}

json corpus_to_json(const Corpus& corpus) {
  json j;
  json instances = json::array();
  for (const auto& inst : corpus) {
    json ji;
    ji["model"] = model_to_json(inst.model);
    json gt = json::array();
    for (int y : inst.ground_truth) gt.push_back(y);
    ji["ground_truth"] = std::move(gt);
    if (inst.candidates) ji["candidates"] = candidates_to_json(*inst.candidates);
    instances.push_back(std::move(ji));
  }
  j["instances"] = std::move(instances);
  return j;
}

Corpus corpus_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::parse_error, "corpus: expected an object");
  const json& ji = member(j, "instances");
  if (!ji.is_array()) fail(ErrorCode::parse_error, "instances: expected an array");
  Corpus corpus;
  for (const auto& item : ji) {
    if (!item.is_object()) fail(ErrorCode::parse_error, "instance: expected an object");
    CorpusInstance inst{model_from_json(member(item, "model")),
                        int_list(member(item, "ground_truth"), "ground_truth"), std::nullopt};
    validate_configuration(inst.model.graph, inst.ground_truth);
    if (item.contains("candidates"))
      inst.candidates = candidates_from_json(item["candidates"], &inst.model, nullptr);
    corpus.push_back(std::move(inst));
  }
  return corpus;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::file_not_found, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse_error, path + ": " + e.what());
  }
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::file_not_found, "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::file_not_found, "failed writing " + path);
}

void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::file_not_found, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorCode::file_not_found, "failed writing " + path);
}

GibbsModel load_model_file(const std::string& path) { return model_from_json(load_json_file(path)); }

CandidateSet load_candidates_file(const std::string& path, const GibbsModel* model,
                                  std::ostream* warnings) {
  return candidates_from_json(load_json_file(path), model, warnings);
}

Corpus load_corpus_file(const std::string& path) { return corpus_from_json(load_json_file(path)); }

}  // namespace c3rf
