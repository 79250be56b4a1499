#include "tracereg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tracereg/io.hpp"
#include "tracereg/matcore.hpp"
#include "tracereg/solver_glm_trace.hpp"
#include "tracereg/solver_onebit.hpp"
#include "tracereg/solver_rrr.hpp"

namespace tracereg {

namespace {

using njson = nlohmann::ordered_json;

// Stream tags for per-replication seed derivation (see rng.hpp): a
// replication's truth, design/response, rating-matrix, and cell-sampling
// draws come from distinct derived seeds so the streams never interleave.
constexpr std::uint64_t kThetaStream = 1, kDataStream = 2, kRatingStream = 3,
                        kCellStream = 4;

std::uint64_t study_tag(const std::string& study) {
  if (study == "rate") return 1;
  if (study == "alignment") return 2;
  return 3;
}

std::uint64_t kind_tag(StudyKind k) { return static_cast<std::uint64_t>(k) + 1; }

/// Runs fn(0..total-1) on `jobs` workers; tasks own disjoint result slots,
/// so scheduling order never affects the outcome. fn must not throw.
void parallel_for(int total, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, total));
  if (jobs == 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

double spikiness_ratio(const Matrix& delta) {
  const MatrixNorms nm = norms(delta);
  if (nm.frobenius <= 0.0) return 0.0;
  return (nm.elementwise_max / nm.frobenius) * (nm.nuclear / nm.frobenius);
}

int ratio_to_n(double ratio, int d) {
  return std::max(1, static_cast<int>(std::lround(ratio * d * std::log(d))));
}

/// One estimation replication for any ensemble. The design/response seed is
/// recorded in the RepRecord; failures become error records, never throws.
RepRecord estimation_rep(StudyKind kind, int d, int n, int rank, double lambda_c,
                         double r_mult, std::uint64_t master, std::uint64_t stag,
                         int rep) {
  RepRecord rec;
  rec.rep = rep;
  const std::uint64_t ktag = kind_tag(kind);
  const auto du = static_cast<std::uint64_t>(d);
  const auto nu = static_cast<std::uint64_t>(n);
  const auto ru = static_cast<std::uint64_t>(rep);
  const std::uint64_t tseed = derive_seed(master, {stag, ktag, du, nu, ru, kThetaStream});
  const std::uint64_t dseed = derive_seed(master, {stag, ktag, du, nu, ru, kDataStream});
  rec.seed = dseed;
  try {
    FitResult fr;
    Matrix theta_star;
    switch (kind) {
      case StudyKind::matrix_reg: {
        const TrueModel tm =
            gen_theta_star(d, d, rank, ThetaKind::unit_singular_values, tseed);
        const Problem problem = gen_matrix_regression(tm, n, dseed);
        SolverConfig sc;
        sc.lambda = lambda_default(problem, lambda_c);
        sc.curvature = Curvature::quarter_bound;
        fr = fit_glm_trace(problem, sc);
        theta_star = tm.theta_star;
        break;
      }
      case StudyKind::rrr: {
        const TrueModel tm = gen_theta_star(d, d, rank, ThetaKind::unit_frobenius, tseed);
        const Problem problem = gen_rrr(tm, n, dseed);
        RrrConfig rc;
        // The c*sqrt(d log d / n) tuning rate belongs to the per-sample loss
        // (responses summed within a sample); our loss averages over all n*d
        // responses, so the equivalent penalty is that rate divided by d.
        rc.lambda = lambda_default(problem, lambda_c) / static_cast<double>(d);
        rc.literal_scaling = false;  // the per-sample form stalls off the zero regime
        fr = fit_rrr(problem, rc);
        theta_star = tm.theta_star;
        break;
      }
      case StudyKind::onebit: {
        const TrueModel tm = gen_theta_star(d, d, rank, ThetaKind::unit_frobenius, tseed);
        OneBitData ob = gen_onebit(tm, n, r_mult, lambda_c, dseed);
        fr = fit_onebit(ob.problem, ob.config);
        theta_star = tm.theta_star;
        rec.spikiness = spikiness_ratio(fr.theta_hat - tm.theta_star);
        break;
      }
    }
    rec.fro_error = (fr.theta_hat - theta_star).norm();
    rec.log_error = safe_log(rec.fro_error);
    rec.converged = fr.converged;
    rec.outer_iters = fr.outer_iters;
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

RepRecord rating_rep(int d, double ratio, int rank, double lambda_c,
                     std::uint64_t master, int rep) {
  RepRecord rec;
  rec.rep = rep;
  const int n = ratio_to_n(ratio, d);
  const std::uint64_t stag = study_tag("glm_vs_linear");
  const auto du = static_cast<std::uint64_t>(d);
  const auto nu = static_cast<std::uint64_t>(n);
  const auto ru = static_cast<std::uint64_t>(rep);
  const std::uint64_t tseed = derive_seed(master, {stag, du, nu, ru, kThetaStream});
  const std::uint64_t rseed = derive_seed(master, {stag, du, nu, ru, kRatingStream});
  const std::uint64_t cseed = derive_seed(master, {stag, du, nu, ru, kCellStream});
  rec.seed = cseed;
  try {
    // Log-odds truth with a 5-dimensional dominant eigenspace; the rating
    // matrix is realized once and the observations are noiseless reads of it
    // at uniformly resampled cells.
    const TrueModel tm =
        gen_theta_star(d, d, rank, ThetaKind::eigenspace_of_sample_cov, tseed);
    const Eigen::MatrixXi rating = gen_rating_matrix(tm, rseed);
    Rng rng(cseed);
    std::vector<int> rows(n), cols(n);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      rows[i] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d)));
      cols[i] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d)));
      y(i) = static_cast<double>(rating(rows[i], cols[i]));
    }
    const double scale = static_cast<double>(d);
    const Problem glm_problem = make_singleton_problem(
        rows, cols, y, d, d, scale, ExpFamily::bernoulli_logit());
    const Problem lin_problem = make_singleton_problem(
        rows, cols, y, d, d, scale, ExpFamily::gaussian_identity());

    OneBitConfig oc;
    oc.lambda = lambda_c * std::sqrt(d * std::log(d) / static_cast<double>(n));
    oc.R = 2.0 * tm.theta_star.cwiseAbs().maxCoeff();  // log-odds box level
    const FitResult fit_glm = fit_onebit(glm_problem, oc);
    const FitResult fit_lin = fit_onebit(lin_problem, oc);

    // The logistic fit is thresholded on the log-odds scale at 0; the
    // least-squares fit estimates the rating probability, thresholded at 1/2.
    const Eigen::MatrixXi pred_glm =
        predict_ratings(scale * fit_glm.theta_hat, RatingRule::glm_sign);
    const Eigen::MatrixXi pred_lin =
        predict_ratings(scale * fit_lin.theta_hat, RatingRule::linear_half);
    rec.accuracy_glm = rating_accuracy(pred_glm, rating);
    rec.accuracy_linear = rating_accuracy(pred_lin, rating);
    rec.fro_error = (fit_glm.theta_hat - tm.theta_star / scale).norm();
    rec.log_error = safe_log(rec.fro_error);
    rec.converged = fit_glm.converged && fit_lin.converged;
    rec.outer_iters = fit_glm.outer_iters;
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

void aggregate_cell(CellResult& cell) {
  std::vector<double> logs;
  double acc_glm = 0.0, acc_lin = 0.0;
  for (const RepRecord& r : cell.reps) {
    if (!r.ok) continue;
    logs.push_back(r.log_error);
    acc_glm += r.accuracy_glm;
    acc_lin += r.accuracy_linear;
  }
  cell.n_ok = static_cast<int>(logs.size());
  if (cell.n_ok == 0) {
    cell.mean_log_error = std::numeric_limits<double>::quiet_NaN();
    cell.median_log_error = std::numeric_limits<double>::quiet_NaN();
    cell.mean_accuracy_glm = std::numeric_limits<double>::quiet_NaN();
    cell.mean_accuracy_linear = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  cell.mean_log_error = 0.0;
  for (double v : logs) cell.mean_log_error += v;
  cell.mean_log_error /= cell.n_ok;
  std::sort(logs.begin(), logs.end());
  const size_t m = logs.size();
  cell.median_log_error =
      m % 2 ? logs[m / 2] : 0.5 * (logs[m / 2 - 1] + logs[m / 2]);
  cell.mean_accuracy_glm = acc_glm / cell.n_ok;
  cell.mean_accuracy_linear = acc_lin / cell.n_ok;
}

}  // namespace

std::string study_kind_name(StudyKind k) {
  switch (k) {
    case StudyKind::matrix_reg: return "matrix_reg";
    case StudyKind::rrr: return "rrr";
    case StudyKind::onebit: return "onebit";
  }
  return "unknown";
}

RateStudyConfig rate_defaults(StudyKind kind, bool full_scale) {
  RateStudyConfig cfg;
  cfg.kind = kind;
  cfg.lambda_c = kind == StudyKind::matrix_reg ? 0.2 : (kind == StudyKind::rrr ? 0.3 : 0.2);
  if (full_scale) {
    cfg.dims = {20, 40, 60};
    cfg.reps = 100;
  }
  return cfg;
}

AlignmentStudyConfig alignment_defaults(StudyKind kind, bool full_scale) {
  AlignmentStudyConfig cfg;
  cfg.kind = kind;
  if (kind == StudyKind::onebit) {
    cfg.ratio_grid = {30, 60, 90, 120, 150, 180};
    cfg.lambda_c = 0.2;
  } else {
    cfg.ratio_grid = {20, 40, 60, 80, 100, 120};
    cfg.lambda_c = 0.3;
  }
  if (full_scale) {
    cfg.dims = {20, 40, 60, 80};
    cfg.reps = 100;
  }
  return cfg;
}

GlmVsLinearConfig glm_vs_linear_defaults(bool full_scale) {
  GlmVsLinearConfig cfg;
  if (full_scale) {
    cfg.dims = {20, 40, 60, 80};
    cfg.ratio_grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    cfg.reps = 100;
  }
  return cfg;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_line needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "fit_line needs at least two distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

double alignment_statistic(const std::vector<CellResult>& cells) {
  double stat = 0.0;
  for (const CellResult& a : cells) {
    if (a.n_ok == 0) continue;
    double lo = a.mean_log_error, hi = a.mean_log_error;
    for (const CellResult& b : cells) {
      if (b.n_ok == 0 || b.ratio != a.ratio) continue;
      lo = std::min(lo, b.mean_log_error);
      hi = std::max(hi, b.mean_log_error);
    }
    stat = std::max(stat, hi - lo);
  }
  return stat;
}

void summarize_rate(ExperimentReport& report) {
  report.slopes.clear();
  report.intercept_gaps.clear();
  // Common center: mean log n over the shared grid, so the per-dimension
  // fitted values are compared at the same abscissa.
  double center = 0.0;
  for (int n : report.n_grid) center += std::log(static_cast<double>(n));
  center /= static_cast<double>(report.n_grid.size());
  for (int d : report.dims) {
    std::vector<double> xs, ys;
    for (const CellResult& c : report.cells) {
      if (c.d != d || c.n_ok == 0) continue;
      xs.push_back(std::log(static_cast<double>(c.n)));
      ys.push_back(c.mean_log_error);
    }
    if (xs.size() < 2) continue;
    SlopeRow row;
    row.d = d;
    row.line = fit_line(xs, ys);
    row.fit_at_center = row.line.intercept + row.line.slope * center;
    report.slopes.push_back(row);
  }
  for (size_t i = 1; i < report.slopes.size(); ++i) {
    InterceptGap g;
    g.d_from = report.slopes[i - 1].d;
    g.d_to = report.slopes[i].d;
    g.gap = report.slopes[i].fit_at_center - report.slopes[i - 1].fit_at_center;
    report.intercept_gaps.push_back(g);
  }
}

ExperimentReport run_rate_study(const RateStudyConfig& cfg) {
  require(!cfg.dims.empty() && !cfg.n_grid.empty(), "empty grid");
  require(cfg.reps > 0 && cfg.rank > 0 && cfg.lambda_c > 0.0, "bad study config");
  ExperimentReport rep;
  rep.study = "rate";
  rep.kind = study_kind_name(cfg.kind);
  rep.seed = cfg.seed;
  rep.reps = cfg.reps;
  rep.rank = cfg.rank;
  rep.lambda_c = cfg.lambda_c;
  rep.r_mult = cfg.r_mult;
  rep.dims = cfg.dims;
  rep.n_grid = cfg.n_grid;
  for (int d : cfg.dims)
    for (int n : cfg.n_grid) {
      CellResult cell;
      cell.d = d;
      cell.n = n;
      cell.ratio = static_cast<double>(n) / (d * std::log(d));
      cell.reps.resize(cfg.reps);
      rep.cells.push_back(std::move(cell));
    }
  const std::uint64_t stag = study_tag(rep.study);
  const int total = static_cast<int>(rep.cells.size()) * cfg.reps;
  parallel_for(total, cfg.jobs, [&](int t) {
    const int ci = t / cfg.reps, ri = t % cfg.reps;
    CellResult& cell = rep.cells[ci];
    cell.reps[ri] = estimation_rep(cfg.kind, cell.d, cell.n, cfg.rank, cfg.lambda_c,
                                   cfg.r_mult, cfg.seed, stag, ri);
  });
  for (CellResult& c : rep.cells) aggregate_cell(c);
  summarize_rate(rep);
  return rep;
}

ExperimentReport run_alignment_study(const AlignmentStudyConfig& cfg) {
  require(!cfg.dims.empty() && !cfg.ratio_grid.empty(), "empty grid");
  require(cfg.reps > 0 && cfg.rank > 0 && cfg.lambda_c > 0.0, "bad study config");
  require(cfg.kind != StudyKind::matrix_reg,
          "alignment study applies to the ratio-based ensembles (rrr, onebit)");
  ExperimentReport rep;
  rep.study = "alignment";
  rep.kind = study_kind_name(cfg.kind);
  rep.seed = cfg.seed;
  rep.reps = cfg.reps;
  rep.rank = cfg.rank;
  rep.lambda_c = cfg.lambda_c;
  rep.r_mult = cfg.r_mult;
  rep.dims = cfg.dims;
  rep.ratio_grid = cfg.ratio_grid;
  for (int d : cfg.dims)
    for (double ratio : cfg.ratio_grid) {
      CellResult cell;
      cell.d = d;
      cell.n = ratio_to_n(ratio, d);
      cell.ratio = ratio;
      cell.reps.resize(cfg.reps);
      rep.cells.push_back(std::move(cell));
    }
  const std::uint64_t stag = study_tag(rep.study);
  const int total = static_cast<int>(rep.cells.size()) * cfg.reps;
  parallel_for(total, cfg.jobs, [&](int t) {
    const int ci = t / cfg.reps, ri = t % cfg.reps;
    CellResult& cell = rep.cells[ci];
    cell.reps[ri] = estimation_rep(cfg.kind, cell.d, cell.n, cfg.rank, cfg.lambda_c,
                                   cfg.r_mult, cfg.seed, stag, ri);
  });
  for (CellResult& c : rep.cells) aggregate_cell(c);
  rep.alignment_statistic = alignment_statistic(rep.cells);
  return rep;
}

ExperimentReport run_glm_vs_linear(const GlmVsLinearConfig& cfg) {
  require(!cfg.dims.empty() && !cfg.ratio_grid.empty(), "empty grid");
  require(cfg.reps > 0 && cfg.rank > 0 && cfg.lambda_c > 0.0, "bad study config");
  ExperimentReport rep;
  rep.study = "glm_vs_linear";
  rep.kind = "";
  rep.seed = cfg.seed;
  rep.reps = cfg.reps;
  rep.rank = cfg.rank;
  rep.lambda_c = cfg.lambda_c;
  rep.dims = cfg.dims;
  rep.ratio_grid = cfg.ratio_grid;
  for (int d : cfg.dims)
    for (double ratio : cfg.ratio_grid) {
      CellResult cell;
      cell.d = d;
      cell.n = ratio_to_n(ratio, d);
      cell.ratio = ratio;
      cell.reps.resize(cfg.reps);
      rep.cells.push_back(std::move(cell));
    }
  const int total = static_cast<int>(rep.cells.size()) * cfg.reps;
  parallel_for(total, cfg.jobs, [&](int t) {
    const int ci = t / cfg.reps, ri = t % cfg.reps;
    CellResult& cell = rep.cells[ci];
    cell.reps[ri] = rating_rep(cell.d, cell.ratio, cfg.rank, cfg.lambda_c, cfg.seed, ri);
  });
  for (CellResult& c : rep.cells) aggregate_cell(c);
  return rep;
}

std::string report_to_json(const ExperimentReport& r) {
  njson j;
  j["study"] = r.study;
  j["kind"] = r.kind;
  j["seed"] = r.seed;
  j["reps"] = r.reps;
  j["rank"] = r.rank;
  j["lambda_c"] = r.lambda_c;
  j["r_mult"] = r.r_mult;
  j["dims"] = r.dims;
  j["n_grid"] = r.n_grid;
  j["ratio_grid"] = r.ratio_grid;
  njson cells = njson::array();
  for (const CellResult& c : r.cells) {
    njson jc;
    jc["d"] = c.d;
    jc["n"] = c.n;
    jc["ratio"] = c.ratio;
    jc["n_ok"] = c.n_ok;
    jc["mean_log_error"] = c.mean_log_error;
    jc["median_log_error"] = c.median_log_error;
    if (r.study == "glm_vs_linear") {
      jc["mean_accuracy_glm"] = c.mean_accuracy_glm;
      jc["mean_accuracy_linear"] = c.mean_accuracy_linear;
    }
    njson reps = njson::array();
    for (const RepRecord& rr : c.reps) {
      njson jr;
      jr["rep"] = rr.rep;
      jr["seed"] = rr.seed;
      jr["ok"] = rr.ok;
      if (!rr.ok) {
        jr["error"] = rr.error;
      } else {
        jr["fro_error"] = rr.fro_error;
        jr["log_error"] = rr.log_error;
        jr["converged"] = rr.converged;
        jr["outer_iters"] = rr.outer_iters;
        if (r.study == "glm_vs_linear") {
          jr["accuracy_glm"] = rr.accuracy_glm;
          jr["accuracy_linear"] = rr.accuracy_linear;
        }
        if (r.kind == "onebit") jr["spikiness"] = rr.spikiness;
      }
      reps.push_back(std::move(jr));
    }
    jc["replications"] = std::move(reps);
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  if (r.study == "rate") {
    njson slopes = njson::array();
    for (const SlopeRow& s : r.slopes) {
      njson js;
      js["d"] = s.d;
      js["slope"] = s.line.slope;
      js["intercept"] = s.line.intercept;
      js["fit_at_center"] = s.fit_at_center;
      slopes.push_back(std::move(js));
    }
    j["slopes"] = std::move(slopes);
    njson gaps = njson::array();
    for (const InterceptGap& g : r.intercept_gaps) {
      njson jg;
      jg["d_from"] = g.d_from;
      jg["d_to"] = g.d_to;
      jg["gap"] = g.gap;
      gaps.push_back(std::move(jg));
    }
    // gap = difference of fitted lines at the common mean log n (vertical
    // offset between dimension curves), not the extrapolated log n = 0 value
    j["intercept_gaps"] = std::move(gaps);
  }
  if (r.study == "alignment") {
    j["alignment_statistic"] = r.alignment_statistic;
    j["alignment_threshold"] = r.alignment_threshold;
    j["threshold_source"] = "pilot";
  }
  return j.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& r) {
  std::ostringstream out;
  const bool rating = r.study == "glm_vs_linear";
  if (rating) {
    out << "d,n,ratio,rep,seed,ok,accuracy_glm,accuracy_linear\n";
  } else {
    out << "d,n,ratio,rep,seed,ok,fro_error,log_error,converged,outer_iters,spikiness\n";
  }
  for (const CellResult& c : r.cells) {
    for (const RepRecord& rr : c.reps) {
      out << c.d << ',' << c.n << ',' << format_double(c.ratio) << ',' << rr.rep
          << ',' << rr.seed << ',' << (rr.ok ? 1 : 0);
      if (rating) {
        out << ',' << format_double(rr.accuracy_glm) << ','
            << format_double(rr.accuracy_linear);
      } else {
        out << ',' << format_double(rr.fro_error) << ',' << format_double(rr.log_error)
            << ',' << (rr.converged ? 1 : 0) << ',' << rr.outer_iters << ','
            << format_double(rr.spikiness);
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string report_summary(const ExperimentReport& r) {
  std::ostringstream out;
  char buf[256];
  out << "study=" << r.study;
  if (!r.kind.empty()) out << " kind=" << r.kind;
  out << " seed=" << r.seed << " reps=" << r.reps << " lambda_c=" << r.lambda_c
      << "\n";
  if (r.study == "glm_vs_linear") {
    out << "    d   ratio       n   acc_glm   acc_lin\n";
    for (const CellResult& c : r.cells) {
      std::snprintf(buf, sizeof buf, "%5d %7.1f %7d %9.4f %9.4f\n", c.d, c.ratio,
                    c.n, c.mean_accuracy_glm, c.mean_accuracy_linear);
      out << buf;
    }
    return out.str();
  }
  out << "    d   ratio       n   mean_log_err   median_log_err   ok\n";
  for (const CellResult& c : r.cells) {
    std::snprintf(buf, sizeof buf, "%5d %7.1f %7d %14.5f %16.5f %4d\n", c.d,
                  c.ratio, c.n, c.mean_log_error, c.median_log_error, c.n_ok);
    out << buf;
  }
  if (r.study == "rate") {
    for (const SlopeRow& s : r.slopes) {
      std::snprintf(buf, sizeof buf,
                    "d=%d: slope=%.4f intercept=%.4f fit_at_center=%.4f\n", s.d,
                    s.line.slope, s.line.intercept, s.fit_at_center);
      out << buf;
    }
    for (const InterceptGap& g : r.intercept_gaps) {
      std::snprintf(buf, sizeof buf, "gap d=%d -> d=%d: %.4f\n", g.d_from, g.d_to,
                    g.gap);
      out << buf;
    }
  }
  if (r.study == "alignment") {
    std::snprintf(buf, sizeof buf, "alignment_statistic=%.4f (threshold %.2f)\n",
                  r.alignment_statistic, r.alignment_threshold);
    out << buf;
  }
  return out.str();
}

}  // namespace tracereg
