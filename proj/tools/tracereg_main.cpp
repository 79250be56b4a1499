// Command-line front end: single fits from CSV files and seeded simulation
// studies. Exit codes: 0 success (including non-converged fits, which are
// reported in the diagnostics), 2 usage/input error, 3 internal solver error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tracereg/experiments.hpp"
#include "tracereg/io.hpp"
#include "tracereg/matcore.hpp"
#include "tracereg/solver_glm_trace.hpp"
#include "tracereg/solver_onebit.hpp"
#include "tracereg/solver_rrr.hpp"

namespace {

using njson = nlohmann::ordered_json;
using namespace tracereg;

struct FitOptions {
  std::string model;
  std::string family = "logit";
  std::string design_path;
  std::string response_path;
  std::string out_path;
  int rows = 0, cols = 0;
  double lambda = 0.0, lambda_auto = 0.0;
  double box_r = 0.0;
  double scale = 0.0;
  bool literal_scaling = true;
  std::string curvature = "per-sample";
  SolverConfig tuning;  // shared tolerance/iteration knobs
  double rho = 0.1, gamma = 1.618, admm_tol = 1e-5;
  int admm_max_iter = 2000;
};

ExpFamily parse_family(const std::string& name) {
  if (name == "logit") return ExpFamily::bernoulli_logit();
  if (name == "gaussian") return ExpFamily::gaussian_identity();
  throw InvalidInput("unknown family: " + name);
}

Vector read_response_vector(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  require(m.cols() == 1, path + ": response file must have one column, found " +
                             std::to_string(m.cols()));
  return m.col(0);
}

void check_out_file(const std::string& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent, ec);
  const fs::path probe = (parent.empty() ? fs::path(".") : parent) / ".write_probe";
  try {
    write_text_file(probe.string(), "ok\n");
  } catch (const InvalidInput&) {
    throw InvalidInput("output path is not writable: " + path);
  }
  fs::remove(probe, ec);
}

int run_fit(const FitOptions& opt) {
  require((opt.lambda > 0.0) != (opt.lambda_auto > 0.0),
          "exactly one of --lambda and --lambda-auto is required");
  const ExpFamily fam = parse_family(opt.family);
  check_out_file(opt.out_path);  // fail fast, before any parse or solve

  Problem problem;
  if (opt.model == "glm-trace") {
    require(!opt.response_path.empty(), "--response is required for glm-trace");
    require(opt.rows > 0 && opt.cols > 0, "--rows and --cols are required for glm-trace");
    Matrix x = read_matrix_csv(opt.design_path);
    Vector y = read_response_vector(opt.response_path);
    require(x.cols() == static_cast<Index>(opt.rows) * opt.cols,
            "design row length " + std::to_string(x.cols()) +
                " does not equal rows*cols = " + std::to_string(opt.rows * opt.cols));
    problem = make_general_problem(std::move(x), std::move(y), opt.rows, opt.cols, fam);
  } else if (opt.model == "rrr") {
    require(!opt.response_path.empty(), "--response is required for rrr");
    Matrix x = read_matrix_csv(opt.design_path);
    Matrix y = read_matrix_csv(opt.response_path);
    problem = make_rrr_problem(std::move(x), std::move(y), fam);
  } else if (opt.model == "onebit") {
    require(opt.response_path.empty(),
            "onebit reads observations from the --design triplet file; --response "
            "does not apply");
    require(opt.rows > 0 && opt.cols > 0, "--rows and --cols are required for onebit");
    require(opt.box_r > 0.0, "--R is required for onebit");
    const Triplets t = read_triplets_csv(opt.design_path);
    for (size_t i = 0; i < t.rows.size(); ++i) {
      if (t.rows[i] < 0 || t.rows[i] >= opt.rows || t.cols[i] < 0 || t.cols[i] >= opt.cols)
        throw InvalidInput(opt.design_path + ": cell index out of range at row " +
                           std::to_string(i + 1));
    }
    const double scale =
        opt.scale > 0.0 ? opt.scale
                        : std::sqrt(static_cast<double>(opt.rows) * opt.cols);
    problem = make_singleton_problem(t.rows, t.cols, t.y, opt.rows, opt.cols, scale, fam);
  } else {
    throw InvalidInput("unknown model: " + opt.model);
  }

  const double lambda =
      opt.lambda > 0.0 ? opt.lambda : lambda_default(problem, opt.lambda_auto);

  FitResult fr;
  if (opt.model == "glm-trace") {
    SolverConfig cfg = opt.tuning;
    cfg.lambda = lambda;
    cfg.curvature = opt.curvature == "quarter-bound" ? Curvature::quarter_bound
                                                     : Curvature::per_sample;
    fr = fit_glm_trace(problem, cfg);
  } else if (opt.model == "rrr") {
    RrrConfig cfg;
    static_cast<SolverConfig&>(cfg) = opt.tuning;
    cfg.lambda = lambda;
    cfg.literal_scaling = opt.literal_scaling;
    fr = fit_rrr(problem, cfg);
  } else {
    OneBitConfig cfg;
    cfg.lambda = lambda;
    cfg.R = opt.box_r;
    cfg.rho = opt.rho;
    cfg.gamma = opt.gamma;
    cfg.admm_tol = opt.admm_tol;
    cfg.admm_max_iter = opt.admm_max_iter;
    cfg.max_outer = opt.tuning.max_outer;
    cfg.outer_tol = opt.tuning.outer_tol;
    fr = fit_onebit(problem, cfg);
  }

  write_matrix_csv(opt.out_path, fr.theta_hat);

  njson diag;
  diag["model"] = opt.model;
  diag["family"] = opt.family;
  diag["d1"] = problem.d1;
  diag["d2"] = problem.d2;
  diag["n"] = problem.n_samples();
  diag["lambda"] = lambda;
  diag["lambda_effective"] = fr.lambda_effective;
  diag["objective"] = fr.objective;
  diag["converged"] = fr.converged;
  diag["outer_iters"] = fr.outer_iters;
  diag["inner_iters_total"] = fr.inner_iters_total;
  diag["kkt_operator_norm"] = fr.kkt_operator_norm;
  diag["kkt_alignment_gap"] = fr.kkt_alignment_gap;
  diag["rank"] = numerical_rank(fr.theta_hat);
  diag["nuclear_norm"] = norms(fr.theta_hat).nuclear;
  diag["theta_file"] = opt.out_path;
  std::cout << diag.dump(2) << "\n";
  return 0;
}

struct SimulateOptions {
  std::string study;
  std::string kind;
  std::string out_dir;
  bool full_scale = false;
  std::vector<int> dims;
  std::vector<int> n_grid;
  std::vector<double> ratio_grid;
  int reps = -1;
  int rank = -1;
  double lambda_c = 0.0;
  double r_mult = 0.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 0;
};

StudyKind parse_kind(const std::string& name) {
  if (name == "matrix-reg") return StudyKind::matrix_reg;
  if (name == "rrr") return StudyKind::rrr;
  if (name == "onebit") return StudyKind::onebit;
  throw InvalidInput("unknown kind: " + name);
}

std::uint64_t resolve_seed(const SimulateOptions& opt) {
  if (opt.seed_given) return opt.seed;
  if (const char* env = std::getenv("TRACEREG_SEED")) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || errno == ERANGE)
      throw InvalidInput(std::string("TRACEREG_SEED is not a valid integer: ") + env);
    return v;
  }
  return 20260816ULL;
}

void check_out_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = fs::path(dir) / ".write_probe";
  try {
    write_text_file(probe.string(), "ok\n");
  } catch (const InvalidInput&) {
    throw InvalidInput("output directory is not writable: " + dir);
  }
  fs::remove(probe, ec);
}

int run_simulate(const SimulateOptions& opt) {
  check_out_dir(opt.out_dir);  // fail fast, before any solve
  const std::uint64_t seed = resolve_seed(opt);
  const auto t0 = std::chrono::steady_clock::now();

  ExperimentReport report;
  if (opt.study == "rate") {
    require(!opt.kind.empty(), "--kind is required for the rate study");
    RateStudyConfig cfg = rate_defaults(parse_kind(opt.kind), opt.full_scale);
    if (!opt.dims.empty()) cfg.dims = opt.dims;
    if (!opt.n_grid.empty()) cfg.n_grid = opt.n_grid;
    if (opt.reps > 0) cfg.reps = opt.reps;
    if (opt.rank > 0) cfg.rank = opt.rank;
    if (opt.lambda_c > 0.0) cfg.lambda_c = opt.lambda_c;
    if (opt.r_mult > 0.0) cfg.r_mult = opt.r_mult;
    cfg.seed = seed;
    cfg.jobs = opt.jobs;
    report = run_rate_study(cfg);
  } else if (opt.study == "alignment") {
    require(!opt.kind.empty(), "--kind is required for the alignment study");
    AlignmentStudyConfig cfg = alignment_defaults(parse_kind(opt.kind), opt.full_scale);
    if (!opt.dims.empty()) cfg.dims = opt.dims;
    if (!opt.ratio_grid.empty()) cfg.ratio_grid = opt.ratio_grid;
    if (opt.reps > 0) cfg.reps = opt.reps;
    if (opt.rank > 0) cfg.rank = opt.rank;
    if (opt.lambda_c > 0.0) cfg.lambda_c = opt.lambda_c;
    if (opt.r_mult > 0.0) cfg.r_mult = opt.r_mult;
    cfg.seed = seed;
    cfg.jobs = opt.jobs;
    report = run_alignment_study(cfg);
  } else if (opt.study == "glm-vs-linear") {
    GlmVsLinearConfig cfg = glm_vs_linear_defaults(opt.full_scale);
    if (!opt.dims.empty()) cfg.dims = opt.dims;
    if (!opt.ratio_grid.empty()) cfg.ratio_grid = opt.ratio_grid;
    if (opt.reps > 0) cfg.reps = opt.reps;
    if (opt.rank > 0) cfg.rank = opt.rank;
    if (opt.lambda_c > 0.0) cfg.lambda_c = opt.lambda_c;
    cfg.seed = seed;
    cfg.jobs = opt.jobs;
    report = run_glm_vs_linear(cfg);
  } else {
    throw InvalidInput("unknown study: " + opt.study);
  }

  namespace fs = std::filesystem;
  write_text_file((fs::path(opt.out_dir) / "report.json").string(),
                  report_to_json(report));
  write_text_file((fs::path(opt.out_dir) / "results.csv").string(),
                  report_to_csv(report));
  std::cout << report_summary(report);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // timing goes to stdout only; report files stay byte-deterministic
  char buf[64];
  std::snprintf(buf, sizeof buf, "elapsed_seconds=%.1f\n", secs);
  std::cout << buf << "wrote " << (fs::path(opt.out_dir) / "report.json").string()
            << " and " << (fs::path(opt.out_dir) / "results.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nuclear-norm-regularized trace regression: fits and simulation studies"};
  app.set_config("--config", "", "Config file with key=value lines; flags override it");
  app.require_subcommand(1);

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand("fit", "Fit one model from CSV files");
  fit->add_option("--model", fit_opt.model, "glm-trace | rrr | onebit")->required();
  fit->add_option("--family", fit_opt.family, "logit | gaussian (default logit)");
  fit->add_option("--design", fit_opt.design_path,
                  "Design CSV: vec rows (glm-trace), covariate rows (rrr), or "
                  "i,j,y triplets (onebit)")
      ->required();
  fit->add_option("--response", fit_opt.response_path,
                  "Response CSV: one column (glm-trace) or n x d matrix (rrr)");
  fit->add_option("--rows", fit_opt.rows, "Coefficient row count d1");
  fit->add_option("--cols", fit_opt.cols, "Coefficient column count d2");
  fit->add_option("--lambda", fit_opt.lambda, "Penalty level (exclusive with --lambda-auto)");
  fit->add_option("--lambda-auto", fit_opt.lambda_auto,
                  "Penalty constant c for the ensemble default rate");
  fit->add_option("--R", fit_opt.box_r, "onebit: box level on the log-odds scale");
  fit->add_option("--scale", fit_opt.scale,
                  "onebit: singleton design scale (default sqrt(rows*cols))");
  fit->add_option("--out", fit_opt.out_path, "Output CSV for the fitted matrix")->required();
  fit->add_option("--outer-tol", fit_opt.tuning.outer_tol, "Outer stopping tolerance");
  fit->add_option("--inner-tol", fit_opt.tuning.inner_tol, "Inner stopping tolerance");
  fit->add_option("--max-outer", fit_opt.tuning.max_outer, "Outer iteration cap");
  fit->add_option("--max-inner", fit_opt.tuning.max_inner, "Inner iteration cap");
  fit->add_option("--beta", fit_opt.tuning.beta, "Splitting quadratic coupling");
  fit->add_option("--alpha", fit_opt.tuning.alpha, "Splitting dual relaxation");
  fit->add_option("--curvature", fit_opt.curvature,
                  "glm-trace: per-sample | quarter-bound");
  fit->add_flag("--literal-scaling,!--self-consistent-scaling", fit_opt.literal_scaling,
                "rrr: per-sample update normalization (default) vs self-consistent");
  fit->add_option("--rho", fit_opt.rho, "onebit: ADMM penalty");
  fit->add_option("--gamma", fit_opt.gamma, "onebit: ADMM dual step multiplier");
  fit->add_option("--admm-tol", fit_opt.admm_tol, "onebit: ADMM tolerance");
  fit->add_option("--admm-max-iter", fit_opt.admm_max_iter, "onebit: ADMM iteration cap");

  SimulateOptions sim_opt;
  CLI::App* sim = app.add_subcommand("simulate", "Run a seeded simulation study");
  sim->add_option("--study", sim_opt.study, "rate | alignment | glm-vs-linear")->required();
  sim->add_option("--kind", sim_opt.kind, "matrix-reg | rrr | onebit (rate/alignment)");
  sim->add_option("--out-dir", sim_opt.out_dir, "Directory for report.json and results.csv")
      ->required();
  sim->add_flag("--full-scale", sim_opt.full_scale,
                "Full-size grids and 100 replications (hours, not minutes)");
  sim->add_option("--dims", sim_opt.dims, "Dimension grid override")->delimiter(',');
  sim->add_option("--n-grid", sim_opt.n_grid, "Sample-size grid override (rate)")
      ->delimiter(',');
  sim->add_option("--ratio-grid", sim_opt.ratio_grid,
                  "n/(d log d) grid override (alignment, glm-vs-linear)")
      ->delimiter(',');
  sim->add_option("--reps", sim_opt.reps, "Replications per grid cell");
  sim->add_option("--rank", sim_opt.rank, "True model rank");
  sim->add_option("--lambda-c", sim_opt.lambda_c, "Penalty constant override");
  sim->add_option("--r-mult", sim_opt.r_mult, "onebit box slack override");
  sim->add_option("--seed", sim_opt.seed, "Master seed (else TRACEREG_SEED, else 20260816)")
      ->trigger_on_parse()
      ->each([&](const std::string&) { sim_opt.seed_given = true; });
  sim->add_option("--jobs", sim_opt.jobs, "Worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
    if (fit->parsed()) return run_fit(fit_opt);
    return run_simulate(sim_opt);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const tracereg::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tracereg::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
