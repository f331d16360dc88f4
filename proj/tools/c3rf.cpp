#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "c3rf/experiments.hpp"
#include "c3rf/io.hpp"
#include "c3rf/rng.hpp"
#include "c3rf/version.hpp"

namespace {

using nlohmann::json;

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) out += ' ';
    out += argv[i];
  }
  return out;
}

int error_exit_code(c3rf::ErrorCode c) {
  switch (c) {
    case c3rf::ErrorCode::all_configurations_forbidden:
    case c3rf::ErrorCode::empty_ball:
    case c3rf::ErrorCode::empty_candidate_set:
    case c3rf::ErrorCode::non_convergence:
      return 3;
    case c3rf::ErrorCode::too_large_to_enumerate:
    case c3rf::ErrorCode::overflow:
      return 4;
    default:
      return 2;
  }
}

void emit_json(json j, const c3rf::ToolMeta& meta, const std::string& out) {
  j["_meta"] = c3rf::meta_json(meta);
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    c3rf::save_json_file(out, j);
  }
}

void emit_text(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    c3rf::save_text_file(out, text);
  }
}

// Flags shared by every subcommand that runs belief propagation.
struct BpCli {
  int max_iterations = 200;
  double tol = 1e-8;
  double damping = 0.0;
  CLI::Option* damping_opt = nullptr;
};

void add_bp_flags(CLI::App* sub, BpCli& bp) {
  sub->add_option("--max-iterations", bp.max_iterations, "Belief propagation sweep cap")
      ->check(CLI::PositiveNumber);
  sub->add_option("--tol", bp.tol, "Convergence tolerance on log-message change");
  bp.damping_opt =
      sub->add_option("--damping", bp.damping,
                      "Log-message damping in [0,1); default 0 on forests and 0.5 otherwise");
}

c3rf::BPSettings to_settings(const BpCli& bp) {
  c3rf::BPSettings s;
  s.max_iterations = bp.max_iterations;
  s.convergence_tol = bp.tol;
  if (bp.damping_opt != nullptr && bp.damping_opt->count() > 0) s.damping = bp.damping;
  return s;
}

c3rf::InferenceBackend make_backend(bool exact, const BpCli& bp, std::uint64_t cap) {
  c3rf::InferenceBackend backend;
  backend.kind = exact ? c3rf::InferenceBackend::Kind::exact : c3rf::InferenceBackend::Kind::loopy_bp;
  backend.settings = to_settings(bp);
  backend.enumeration_cap = cap;
  return backend;
}

c3rf::PredictorKind parse_kind(const std::string& s) {
  if (s == "map") return c3rf::PredictorKind::map;
  if (s == "delta") return c3rf::PredictorKind::delta;
  if (s == "mass") return c3rf::PredictorKind::mass;
  if (s == "crf_fela") return c3rf::PredictorKind::crf_fela;
  if (s == "c3rf_fela") return c3rf::PredictorKind::c3rf_fela;
  c3rf::fail(c3rf::ErrorCode::invalid_argument, "unknown predictor kind: " + s);
}

const char* kind_name(c3rf::PredictorKind k) {
  switch (k) {
    case c3rf::PredictorKind::map: return "map";
    case c3rf::PredictorKind::delta: return "delta";
    case c3rf::PredictorKind::mass: return "mass";
    case c3rf::PredictorKind::crf_fela: return "crf_fela";
    case c3rf::PredictorKind::c3rf_fela: return "c3rf_fela";
  }
  return "unknown";
}

c3rf::LossSpec make_loss(const std::string& name, int num_classes) {
  c3rf::LossSpec spec;
  spec.kind = name == "iou" ? c3rf::LossKind::iou : c3rf::LossKind::hamming;
  spec.num_classes = num_classes;
  return spec;
}

constexpr std::uint64_t kMix = 0x9e3779b97f4a7c15ull;

// Seeded synthetic corpus: random grid models with ground truths derived from
// the exact MAP by independent per-variable flips.
c3rf::Corpus synthetic_corpus(int count, int side, std::uint64_t seed, double potential_low,
                              double temperature, double gt_flip, std::uint64_t cap) {
  if (count < 1) c3rf::fail(c3rf::ErrorCode::invalid_argument, "need at least one instance");
  c3rf::Corpus corpus;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = (seed * kMix + static_cast<std::uint64_t>(i) + 1) * kMix;
    c3rf::GibbsModel model = c3rf::gen_grid(side, s, potential_low, temperature);
    c3rf::Configuration gt = c3rf::map_exhaustive(model, cap);
    c3rf::Rng flips(s ^ 0x0f0f0f0f0f0f0f0full);
    for (auto& y : gt) {
      if (flips.uniform() < gt_flip) y = 1 - y;
    }
    corpus.push_back({std::move(model), std::move(gt), std::nullopt});
  }
  return corpus;
}

std::string csv_cell(double x) { return c3rf::format_double(x); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ball-constrained mass inference and loss-aware prediction on discrete factor graphs"};
  app.require_subcommand(1);

  c3rf::ToolMeta meta{join_args(argc, argv), std::nullopt};

  // ---- gen-grid ------------------------------------------------------------
  struct {
    int side = 3;
    std::uint64_t seed = 0;
    double potential_low = -5.0;
    double temperature = 1.0;
    std::string out;
  } gg;
  {
    auto* sub = app.add_subcommand("gen-grid", "Generate a seeded random binary grid model");
    sub->add_option("--n", gg.side, "Grid side length")->required()->check(CLI::PositiveNumber);
    sub->add_option("--seed", gg.seed, "RNG seed")->capture_default_str();
    sub->add_option("--potential-low", gg.potential_low, "Lower bound of uniform log-potentials")
        ->capture_default_str();
    sub->add_option("--temperature", gg.temperature, "Model temperature")->capture_default_str();
    sub->add_option("--out", gg.out, "Output file (stdout when omitted)");
    sub->callback([&] {
      meta.seed = gg.seed;
      emit_json(c3rf::model_to_json(c3rf::gen_grid(gg.side, gg.seed, gg.potential_low, gg.temperature)),
                meta, gg.out);
    });
  }

  // ---- infer ---------------------------------------------------------------
  struct {
    std::string model;
    bool exact = false;
    double temperature = 1.0;
    std::uint64_t cap = c3rf::kDefaultEnumerationCap;
    std::string out;
    BpCli bp;
    CLI::Option* temp_opt = nullptr;
  } inf;
  {
    auto* sub = app.add_subcommand("infer", "Marginals and log-partition estimate for a model");
    sub->add_option("--model", inf.model, "Model file")->required();
    sub->add_flag("--exact", inf.exact, "Use the enumeration oracle instead of belief propagation");
    inf.temp_opt = sub->add_option("--temperature", inf.temperature,
                                   "Override the model temperature");
    sub->add_option("--enumeration-cap", inf.cap, "Joint-space size limit for --exact");
    sub->add_option("--out", inf.out, "Output file (stdout when omitted)");
    add_bp_flags(sub, inf.bp);
    sub->callback([&] {
      c3rf::GibbsModel model = c3rf::load_model_file(inf.model);
      if (inf.temp_opt->count() > 0) model = c3rf::with_temperature(model, inf.temperature);
      json j;
      if (inf.exact) {
        j = c3rf::marginals_to_json(c3rf::exact_marginals(model, inf.cap));
        j["log_z"] = c3rf::exact_log_z(model, inf.cap);
      } else {
        const c3rf::Marginals m = c3rf::sum_product(model, to_settings(inf.bp));
        j = c3rf::marginals_to_json(m);
        j["log_z"] = c3rf::bethe_log_z(model, m);
      }
      emit_json(std::move(j), meta, inf.out);
    });
  }

  // ---- mass ----------------------------------------------------------------
  struct {
    std::string model;
    std::vector<int> center;
    int radius = 0;
    double rho = 0.0;
    bool exact = false;
    double temperature = 1.0;
    std::uint64_t cap = c3rf::kDefaultEnumerationCap;
    std::string out;
    BpCli bp;
    CLI::Option *radius_opt = nullptr, *rho_opt = nullptr, *temp_opt = nullptr;
  } ms;
  {
    auto* sub = app.add_subcommand("mass", "Ball-constrained mass and marginals around a center");
    sub->add_option("--model", ms.model, "Model file")->required();
    sub->add_option("--center", ms.center, "Center configuration, comma separated")
        ->required()
        ->delimiter(',');
    ms.radius_opt = sub->add_option("--radius", ms.radius, "Hamming radius");
    ms.rho_opt = sub->add_option("--radius-fraction", ms.rho, "Radius as a fraction of n");
    ms.radius_opt->excludes(ms.rho_opt);
    sub->add_flag("--exact", ms.exact, "Use the enumeration oracle");
    ms.temp_opt = sub->add_option("--temperature", ms.temperature, "Override the model temperature");
    sub->add_option("--enumeration-cap", ms.cap, "Ball-size limit for --exact");
    sub->add_option("--out", ms.out, "Output file (stdout when omitted)");
    add_bp_flags(sub, ms.bp);
    sub->callback([&] {
      if (ms.radius_opt->count() == 0 && ms.rho_opt->count() == 0)
        throw CLI::RequiredError("--radius or --radius-fraction");
      c3rf::GibbsModel model = c3rf::load_model_file(ms.model);
      if (ms.temp_opt->count() > 0) model = c3rf::with_temperature(model, ms.temperature);
      c3rf::HammingBall ball;
      ball.center = ms.center;
      ball.radius = ms.radius_opt->count() > 0
                        ? ms.radius
                        : c3rf::radius_from_fraction(ms.rho, model.graph.num_variables());
      const c3rf::ConstrainedPosterior post =
          ms.exact ? c3rf::exact_constrained_oracle(model, ball, ms.cap)
                   : c3rf::constrained_posterior(model, ball, to_settings(ms.bp));
      emit_json(c3rf::posterior_to_json(post), meta, ms.out);
    });
  }

  // ---- divmbest ------------------------------------------------------------
  struct {
    std::string model;
    int m = 5;
    double lambda = 0.1;
    bool heuristic = false;
    int unique = 0;
    std::uint64_t cap = c3rf::kDefaultEnumerationCap;
    std::string out;
    BpCli bp;
  } dm;
  {
    auto* sub = app.add_subcommand("divmbest", "Diverse MAP candidate generation");
    sub->add_option("--model", dm.model, "Model file")->required();
    sub->add_option("--m", dm.m, "Number of solutions")->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--lambda", dm.lambda, "Diversity strength")->capture_default_str();
    sub->add_flag("--heuristic-map", dm.heuristic, "Use max-product instead of exhaustive MAP");
    sub->add_option("--unique", dm.unique, "Keep the first occurrences of this many distinct solutions");
    sub->add_option("--enumeration-cap", dm.cap, "Joint-space size limit for exhaustive MAP");
    sub->add_option("--out", dm.out, "Output file (stdout when omitted)");
    add_bp_flags(sub, dm.bp);
    sub->callback([&] {
      const c3rf::GibbsModel model = c3rf::load_model_file(dm.model);
      c3rf::CandidateSet set = c3rf::divmbest(
          model, dm.m, dm.lambda,
          dm.heuristic ? c3rf::MapSolver::max_product : c3rf::MapSolver::exhaustive,
          to_settings(dm.bp), dm.cap);
      if (dm.unique > 0) set = c3rf::first_unique(set, dm.unique);
      emit_json(c3rf::candidates_to_json(set), meta, dm.out);
    });
  }

  // ---- predict ---------------------------------------------------------------
  struct {
    std::string model;
    std::string candidates;
    std::string kind = "c3rf_fela";
    double rho = 0.0;
    double temperature = 1.0;
    std::string loss = "hamming";
    int num_classes = 2;
    int m = 5;
    double lambda = 0.1;
    bool heuristic = false;
    bool exact = false;
    std::uint64_t cap = c3rf::kDefaultEnumerationCap;
    std::string out;
    BpCli bp;
    CLI::Option* temp_opt = nullptr;
  } pr;
  {
    auto* sub = app.add_subcommand("predict", "Loss-aware prediction over a candidate set");
    sub->add_option("--model", pr.model, "Model file")->required();
    sub->add_option("--candidates", pr.candidates,
                    "Candidate file; generated in-process when omitted");
    sub->add_option("--kind", pr.kind, "Predictor: map, delta, mass, crf_fela, c3rf_fela")
        ->check(CLI::IsMember({"map", "delta", "mass", "crf_fela", "c3rf_fela"}))
        ->capture_default_str();
    sub->add_option("--radius-fraction,--rho", pr.rho, "Ball radius as a fraction of n")
        ->capture_default_str();
    pr.temp_opt = sub->add_option("--temperature", pr.temperature, "Override the model temperature");
    sub->add_option("--loss", pr.loss, "Loss: hamming or iou")
        ->check(CLI::IsMember({"hamming", "iou"}))
        ->capture_default_str();
    sub->add_option("--num-classes", pr.num_classes, "Label universe for the iou loss")
        ->capture_default_str();
    sub->add_option("--m", pr.m, "Candidates to generate when no file is given")
        ->capture_default_str();
    sub->add_option("--lambda", pr.lambda, "Diversity strength for generation")->capture_default_str();
    sub->add_flag("--heuristic-map", pr.heuristic, "Generate candidates with max-product");
    sub->add_flag("--exact", pr.exact, "Use enumeration oracles for masses and marginals");
    sub->add_option("--enumeration-cap", pr.cap, "Enumeration size limit for --exact");
    sub->add_option("--out", pr.out, "Output file (stdout when omitted)");
    add_bp_flags(sub, pr.bp);
    sub->callback([&] {
      const c3rf::GibbsModel model = c3rf::load_model_file(pr.model);
      const c3rf::CandidateSet set =
          pr.candidates.empty()
              ? c3rf::divmbest(model, pr.m, pr.lambda,
                               pr.heuristic ? c3rf::MapSolver::max_product
                                            : c3rf::MapSolver::exhaustive,
                               to_settings(pr.bp), pr.cap)
              : c3rf::load_candidates_file(pr.candidates, &model, &std::cerr);
      c3rf::PredictorConfig cfg;
      cfg.kind = parse_kind(pr.kind);
      cfg.radius_fraction = pr.rho;
      cfg.temperature = pr.temp_opt->count() > 0 ? pr.temperature : model.temperature;
      cfg.loss = make_loss(pr.loss, pr.num_classes);
      const c3rf::Prediction p =
          c3rf::predict(model, set, cfg, make_backend(pr.exact, pr.bp, pr.cap));
      emit_json(c3rf::prediction_to_json(p), meta, pr.out);
    });
  }

  // ---- tune ------------------------------------------------------------------
  struct {
    std::string corpus;
    int synthetic = 0;
    int side = 3;
    double gt_flip = 0.1;
    double potential_low = -5.0;
    std::string method = "erm";
    std::string kind = "c3rf_fela";
    std::string loss = "hamming";
    int num_classes = 2;
    std::vector<double> lambdas;
    std::vector<double> rhos;
    std::vector<double> temps;
    double pin_t = 0.0;
    std::string mode = "kfold";
    int folds = 5;
    int permutations = 1;
    std::uint64_t seed = 0;
    int m = 3;
    bool heuristic = false;
    bool exact = false;
    std::uint64_t cap = c3rf::kDefaultEnumerationCap;
    std::string out;
    std::string summary_out;
    BpCli bp;
    CLI::Option *corpus_opt = nullptr, *synth_opt = nullptr, *pin_opt = nullptr;
  } tn;
  {
    auto* sub = app.add_subcommand("tune", "Cross-validated grid search over (lambda, rho, T)");
    tn.corpus_opt = sub->add_option("--corpus", tn.corpus, "Corpus file");
    tn.synth_opt = sub->add_option("--synthetic", tn.synthetic,
                                   "Generate this many seeded grid instances instead");
    tn.corpus_opt->excludes(tn.synth_opt);
    sub->add_option("--side", tn.side, "Grid side for --synthetic")->capture_default_str();
    sub->add_option("--gt-flip", tn.gt_flip, "Ground-truth flip rate for --synthetic")
        ->capture_default_str();
    sub->add_option("--potential-low", tn.potential_low, "Potential lower bound for --synthetic")
        ->capture_default_str();
    sub->add_option("--method", tn.method, "Selection objective: erm or bdt")
        ->check(CLI::IsMember({"erm", "bdt"}))
        ->capture_default_str();
    sub->add_option("--kind", tn.kind, "Predictor kind under tuning")
        ->check(CLI::IsMember({"map", "delta", "mass", "crf_fela", "c3rf_fela"}))
        ->capture_default_str();
    sub->add_option("--loss", tn.loss, "Loss: hamming or iou")
        ->check(CLI::IsMember({"hamming", "iou"}))
        ->capture_default_str();
    sub->add_option("--num-classes", tn.num_classes, "Label universe for the iou loss")
        ->capture_default_str();
    sub->add_option("--lambdas", tn.lambdas, "Grid of diversity strengths")->delimiter(',');
    sub->add_option("--rhos", tn.rhos, "Grid of radius fractions")->delimiter(',');
    sub->add_option("--temperatures", tn.temps, "Grid of temperatures")->delimiter(',');
    tn.pin_opt = sub->add_option("--pin-temperature", tn.pin_t, "Search with a single fixed T");
    sub->add_option("--mode", tn.mode, "Cross-validation mode: kfold or loo")
        ->check(CLI::IsMember({"kfold", "loo"}))
        ->capture_default_str();
    sub->add_option("--folds", tn.folds, "Fold count for kfold")->capture_default_str();
    sub->add_option("--permutations", tn.permutations, "Random instance-order permutations")
        ->capture_default_str();
    sub->add_option("--seed", tn.seed, "Seed for permutations and --synthetic")->capture_default_str();
    sub->add_option("--m", tn.m, "Candidates per instance")->capture_default_str();
    sub->add_flag("--heuristic-map", tn.heuristic, "Generate candidates with max-product");
    sub->add_flag("--exact", tn.exact, "Use enumeration oracles inside predictors");
    sub->add_option("--enumeration-cap", tn.cap, "Enumeration size limit");
    sub->add_option("--out", tn.out, "CSV report file")->required();
    sub->add_option("--summary-out", tn.summary_out, "Summary file (stdout when omitted)");
    add_bp_flags(sub, tn.bp);
    sub->callback([&] {
      if (tn.corpus_opt->count() == 0 && tn.synth_opt->count() == 0)
        throw CLI::RequiredError("--corpus or --synthetic");
      meta.seed = tn.seed;
      const c3rf::Corpus corpus =
          tn.synth_opt->count() > 0
              ? synthetic_corpus(tn.synthetic, tn.side, tn.seed, tn.potential_low, 1.0, tn.gt_flip,
                                 tn.cap)
              : c3rf::load_corpus_file(tn.corpus);
      c3rf::ParameterGrid grid;
      if (!tn.lambdas.empty()) grid.lambdas = tn.lambdas;
      if (!tn.rhos.empty()) grid.radius_fractions = tn.rhos;
      if (!tn.temps.empty()) grid.temperatures = tn.temps;
      if (tn.pin_opt->count() > 0) grid.temperatures = {tn.pin_t};
      c3rf::CVPlan plan;
      plan.mode = tn.mode == "loo" ? c3rf::CVPlan::Mode::leave_one_out : c3rf::CVPlan::Mode::kfold;
      plan.folds = tn.folds;
      plan.permutations = tn.permutations;
      plan.seed = tn.seed;
      c3rf::PredictorConfig base;
      base.kind = parse_kind(tn.kind);
      base.loss = make_loss(tn.loss, tn.num_classes);
      c3rf::TuneOptions options;
      options.num_candidates = tn.m;
      options.solver =
          tn.heuristic ? c3rf::MapSolver::max_product : c3rf::MapSolver::exhaustive;
      options.backend = make_backend(tn.exact, tn.bp, tn.cap);
      options.enumeration_cap = tn.cap;
      const c3rf::SearchResult result =
          tn.method == "bdt" ? c3rf::grid_search_bdt(corpus, grid, plan, base, options)
                             : c3rf::grid_search_erm(corpus, grid, plan, base, options);

      std::ostringstream csv;
      csv << c3rf::csv_meta_line(meta) << "\n";
      csv << "permutation,fold,lambda,rho,T,heldin_score,heldout_score\n";
      for (const auto& row : result.report) {
        csv << row.permutation << ',' << row.fold << ',' << csv_cell(row.lambda) << ','
            << csv_cell(row.rho) << ',' << csv_cell(row.temperature) << ','
            << csv_cell(row.heldin) << ',' << csv_cell(row.heldout) << "\n";
      }
      emit_text(csv.str(), tn.out);

      json summary;
      summary["method"] = tn.method;
      summary["kind"] = kind_name(base.kind);
      summary["best"] = {{"lambda", result.best_lambda},
                         {"rho", result.best.radius_fraction},
                         {"temperature", result.best.temperature},
                         {"mean_heldout", result.best_mean_heldout}};
      json winners = json::array();
      for (const auto& w : result.fold_winners) {
        winners.push_back({{"permutation", w.permutation},
                           {"fold", w.fold},
                           {"lambda", w.lambda},
                           {"rho", w.rho},
                           {"temperature", w.temperature},
                           {"heldout", w.heldout}});
      }
      summary["fold_winners"] = std::move(winners);
      emit_json(std::move(summary), meta, tn.summary_out);
    });
  }

  // ---- sweep-bethe -----------------------------------------------------------
  struct {
    std::vector<int> sides{3, 4};
    int runs = 10;
    std::vector<int> samples{10, 100, 1000};
    std::uint64_t seed = 0;
    double potential_low = -5.0;
    double temperature = 1.0;
    std::string out;
    BpCli bp;
  } sb;
  {
    auto* sub = app.add_subcommand(
        "sweep-bethe", "Ball-mass estimator study: Bethe versus uniform sampling on random grids");
    sub->add_option("--sides", sb.sides, "Grid side lengths")->delimiter(',');
    sub->add_option("--runs", sb.runs, "Runs per side")->capture_default_str();
    sub->add_option("--samples", sb.samples, "Sample counts for the sampling estimator")
        ->delimiter(',');
    sub->add_option("--seed", sb.seed, "Base seed")->capture_default_str();
    sub->add_option("--potential-low", sb.potential_low, "Potential lower bound")
        ->capture_default_str();
    sub->add_option("--temperature", sb.temperature, "Model temperature")->capture_default_str();
    sub->add_option("--out", sb.out, "CSV file (stdout when omitted)");
    add_bp_flags(sub, sb.bp);
    sub->callback([&] {
      meta.seed = sb.seed;
      const auto rows = c3rf::sweep_bethe(sb.sides, sb.runs, sb.samples, sb.seed, sb.potential_low,
                                          sb.temperature, to_settings(sb.bp));
      std::ostringstream csv;
      csv << c3rf::csv_meta_line(meta) << "\n";
      csv << "side,run,seed,radius,method,samples,estimate,exact,abs_error,converged\n";
      for (const auto& r : rows) {
        csv << r.side << ',' << r.run << ',' << r.seed << ',' << r.radius << ',' << r.method << ','
            << r.samples << ',' << csv_cell(r.estimate) << ',' << csv_cell(r.exact) << ','
            << csv_cell(r.abs_error) << ',' << (r.converged ? "true" : "false") << "\n";
      }
      emit_text(csv.str(), sb.out);
    });
  }

  // ---- rank-corr -------------------------------------------------------------
  struct {
    std::string corpus;
    int synthetic = 0;
    int side = 3;
    double gt_flip = 0.1;
    double potential_low = -5.0;
    std::uint64_t seed = 0;
    std::vector<double> rhos{0.0, 0.1, 0.5};
    std::vector<double> temps{0.5, 1.0, 2.0};
    int m = 10;
    double lambda = 0.1;
    bool heuristic = false;
    std::uint64_t cap = c3rf::kDefaultEnumerationCap;
    std::string out;
    BpCli bp;
    CLI::Option *corpus_opt = nullptr, *synth_opt = nullptr;
  } rc;
  {
    auto* sub = app.add_subcommand(
        "rank-corr", "Spearman correlation between candidate scores and ball log-masses");
    rc.corpus_opt = sub->add_option("--corpus", rc.corpus, "Corpus file");
    rc.synth_opt = sub->add_option("--synthetic", rc.synthetic,
                                   "Generate this many seeded grid instances instead");
    rc.corpus_opt->excludes(rc.synth_opt);
    sub->add_option("--side", rc.side, "Grid side for --synthetic")->capture_default_str();
    sub->add_option("--gt-flip", rc.gt_flip, "Ground-truth flip rate for --synthetic")
        ->capture_default_str();
    sub->add_option("--potential-low", rc.potential_low, "Potential lower bound for --synthetic")
        ->capture_default_str();
    sub->add_option("--seed", rc.seed, "Seed for --synthetic")->capture_default_str();
    sub->add_option("--rhos", rc.rhos, "Radius fractions")->delimiter(',');
    sub->add_option("--temperatures", rc.temps, "Temperatures")->delimiter(',');
    sub->add_option("--m", rc.m, "Candidates per instance")->capture_default_str();
    sub->add_option("--lambda", rc.lambda, "Diversity strength")->capture_default_str();
    sub->add_flag("--heuristic-map", rc.heuristic, "Generate candidates with max-product");
    sub->add_option("--enumeration-cap", rc.cap, "Enumeration size limit");
    sub->add_option("--out", rc.out, "CSV file (stdout when omitted)");
    add_bp_flags(sub, rc.bp);
    sub->callback([&] {
      if (rc.corpus_opt->count() == 0 && rc.synth_opt->count() == 0)
        throw CLI::RequiredError("--corpus or --synthetic");
      meta.seed = rc.seed;
      const c3rf::Corpus corpus =
          rc.synth_opt->count() > 0
              ? synthetic_corpus(rc.synthetic, rc.side, rc.seed, rc.potential_low, 1.0, rc.gt_flip,
                                 rc.cap)
              : c3rf::load_corpus_file(rc.corpus);
      const auto rows = c3rf::rank_correlation(
          corpus, rc.rhos, rc.temps, rc.m, rc.lambda,
          rc.heuristic ? c3rf::MapSolver::max_product : c3rf::MapSolver::exhaustive,
          to_settings(rc.bp));
      std::ostringstream csv;
      csv << c3rf::csv_meta_line(meta) << "\n";
      csv << "instance,rho,T,spearman,status\n";
      for (const auto& r : rows) {
        csv << r.instance << ',' << csv_cell(r.rho) << ',' << csv_cell(r.temperature) << ',';
        if (r.spearman) csv << csv_cell(*r.spearman);
        csv << ',' << r.status << "\n";
      }
      emit_text(csv.str(), rc.out);
    });
  }

  // ---- export-marginals --------------------------------------------------------
  struct {
    std::string model;
    std::string candidates;
    int m = 5;
    double lambda = 0.1;
    bool heuristic = false;
    bool exact = false;
    std::uint64_t cap = c3rf::kDefaultEnumerationCap;
    std::vector<double> rhos{0.25, 0.5};
    std::vector<double> temps{1.0};
    std::string out_dir = ".";
    std::string prefix = "marginals";
    BpCli bp;
  } em;
  {
    auto* sub = app.add_subcommand(
        "export-marginals", "Mixture marginals per (rho, T) as per-variable CSV matrices");
    sub->add_option("--model", em.model, "Model file")->required();
    sub->add_option("--candidates", em.candidates,
                    "Candidate file; generated in-process when omitted");
    sub->add_option("--m", em.m, "Candidates to generate when no file is given")
        ->capture_default_str();
    sub->add_option("--lambda", em.lambda, "Diversity strength")->capture_default_str();
    sub->add_flag("--heuristic-map", em.heuristic, "Generate candidates with max-product");
    sub->add_flag("--exact", em.exact, "Use enumeration oracles for ball posteriors");
    sub->add_option("--enumeration-cap", em.cap, "Enumeration size limit");
    sub->add_option("--rhos", em.rhos, "Radius fractions; 0 and 1 are always added")->delimiter(',');
    sub->add_option("--temperatures", em.temps, "Temperatures")->delimiter(',');
    sub->add_option("--out-dir", em.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--prefix", em.prefix, "Output filename prefix")->capture_default_str();
    add_bp_flags(sub, em.bp);
    sub->callback([&] {
      const c3rf::GibbsModel model = c3rf::load_model_file(em.model);
      const c3rf::CandidateSet set =
          em.candidates.empty()
              ? c3rf::divmbest(model, em.m, em.lambda,
                               em.heuristic ? c3rf::MapSolver::max_product
                                            : c3rf::MapSolver::exhaustive,
                               to_settings(em.bp), em.cap)
              : c3rf::load_candidates_file(em.candidates, &model, &std::cerr);
      // the sweep is always bracketed by the delta-like and unconstrained ends
      std::vector<double> rhos = em.rhos;
      rhos.push_back(0.0);
      rhos.push_back(1.0);
      std::sort(rhos.begin(), rhos.end());
      rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());

      std::filesystem::create_directories(em.out_dir);
      const int n = model.graph.num_variables();
      int max_card = 0;
      for (const auto& v : model.graph.variables) max_card = std::max(max_card, v.cardinality);
      const c3rf::InferenceBackend backend = make_backend(em.exact, em.bp, em.cap);
      for (double rho : rhos) {
        for (double t : em.temps) {
          const c3rf::Marginals m =
              c3rf::c3rf_marginals(c3rf::with_temperature(model, t), set,
                                   c3rf::radius_from_fraction(rho, n), backend);
          std::ostringstream csv;
          csv << c3rf::csv_meta_line(meta) << "\n";
          csv << "variable";
          for (int k = 0; k < max_card; ++k) csv << ",p" << k;
          csv << "\n";
          for (int i = 0; i < n; ++i) {
            csv << i;
            const auto& row = m.node[static_cast<std::size_t>(i)];
            for (int k = 0; k < max_card; ++k) {
              csv << ',';
              if (k < static_cast<int>(row.size())) csv << csv_cell(row[static_cast<std::size_t>(k)]);
            }
            csv << "\n";
          }
          const std::string path = em.out_dir + "/" + em.prefix + "_rho" +
                                   c3rf::format_double(rho) + "_T" + c3rf::format_double(t) +
                                   ".csv";
          c3rf::save_text_file(path, csv.str());
        }
      }
    });
  }

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const c3rf::Error& e) {
    std::cerr << "error [" << c3rf::error_code_name(e.code()) << "]: " << e.what() << "\n";
    return error_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
