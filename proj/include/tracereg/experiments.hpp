#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tracereg/simgen.hpp"
#include "tracereg/types.hpp"

namespace tracereg {

// Numerical studies over (dimension, sample size) grids with seeded,
// independently replicated problem draws. Reports are deterministic
// functions of their config (fixed task order, per-task derived seeds, no
// wall-clock content), so rerunning a study reproduces report files byte
// for byte.

enum class StudyKind { matrix_reg, rrr, onebit };

std::string study_kind_name(StudyKind k);

/// Estimation-error decay in n: fits log ||error||_F against log n per
/// dimension and reports OLS slope/intercept per d plus the vertical gap
/// between dimension curves at the common grid center.
struct RateStudyConfig {
  StudyKind kind = StudyKind::matrix_reg;
  std::vector<int> dims{20, 40};
  std::vector<int> n_grid{1800, 3600, 5400, 7200, 9000};
  int reps = 20;
  int rank = 5;
  double lambda_c = 0.2;  // lambda = lambda_c * ensemble default rate
  double r_mult = 2.0;    // onebit box slack
  std::uint64_t seed = 20260816;
  int jobs = 0;  // 0 = hardware concurrency
};

/// Error curves against the effective-sample ratio n / (d log d): with the
/// theory-matched penalty the curves for different d should collapse. The
/// alignment statistic is the worst vertical spread across dimensions.
struct AlignmentStudyConfig {
  StudyKind kind = StudyKind::rrr;  // rrr or onebit
  std::vector<int> dims{20, 40};
  std::vector<double> ratio_grid{20, 40, 60, 80, 100, 120};
  int reps = 20;
  int rank = 5;
  double lambda_c = 0.3;
  double r_mult = 2.0;  // onebit box slack
  std::uint64_t seed = 20260816;
  int jobs = 0;
};

/// Binary rating recovery: logistic fit vs. penalized-least-squares fit on
/// the same observations of a fixed rating matrix, compared by entrywise
/// prediction accuracy.
struct GlmVsLinearConfig {
  std::vector<int> dims{20};
  std::vector<double> ratio_grid{2, 4, 6, 8, 10};
  int reps = 20;
  int rank = 5;
  double lambda_c = 0.2;  // lambda = c * sqrt(d log d / n), fixed by the study
  std::uint64_t seed = 20260816;
  int jobs = 0;
};

/// Full-size grids take hours; the desk-scale defaults above reproduce the
/// qualitative findings in minutes. Passing full_scale = true restores the
/// full grids (d up to 60/80, 100 replications).
RateStudyConfig rate_defaults(StudyKind kind, bool full_scale);
AlignmentStudyConfig alignment_defaults(StudyKind kind, bool full_scale);
GlmVsLinearConfig glm_vs_linear_defaults(bool full_scale);

struct RepRecord {
  int rep = 0;
  std::uint64_t seed = 0;      // data-stream seed for this replication
  bool ok = false;
  std::string error;           // failure record when !ok
  double fro_error = 0.0;      // ||theta_hat - theta*||_F
  double log_error = 0.0;      // natural log of fro_error
  bool converged = false;
  int outer_iters = 0;
  double spikiness = 0.0;      // onebit: (max/F)*(nuclear/F) of the error
  double accuracy_glm = 0.0;   // glm_vs_linear study only
  double accuracy_linear = 0.0;
};

struct CellResult {
  int d = 0;
  int n = 0;
  double ratio = 0.0;  // n / (d log d) where the grid is ratio-based
  std::vector<RepRecord> reps;
  int n_ok = 0;
  double mean_log_error = 0.0;    // over successful reps
  double median_log_error = 0.0;
  double mean_accuracy_glm = 0.0;
  double mean_accuracy_linear = 0.0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of y on x (exact for exact lines).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct SlopeRow {
  int d = 0;
  LineFit line;            // mean log error on log n
  double fit_at_center = 0.0;  // fitted value at the common mean log n
};

struct InterceptGap {
  int d_from = 0, d_to = 0;
  double gap = 0.0;  // fit_at_center(d_to) - fit_at_center(d_from)
};

struct ExperimentReport {
  std::string study;  // "rate" | "alignment" | "glm_vs_linear"
  std::string kind;   // ensemble name; empty for glm_vs_linear
  std::uint64_t seed = 0;
  int reps = 0;
  int rank = 0;
  double lambda_c = 0.0;
  double r_mult = 0.0;
  std::vector<int> dims;
  std::vector<int> n_grid;
  std::vector<double> ratio_grid;
  std::vector<CellResult> cells;
  std::vector<SlopeRow> slopes;           // rate study
  std::vector<InterceptGap> intercept_gaps;
  double alignment_statistic = 0.0;       // alignment study
  double alignment_threshold = 0.35;      // pilot-derived pass level
};

/// Worst vertical spread of mean log error across dimensions at any shared
/// ratio point (0 when every dimension tracks the same curve). Cells with
/// no successful replication are skipped.
double alignment_statistic(const std::vector<CellResult>& cells);

/// Per-dimension OLS lines of mean log error on log n, plus fitted values
/// at the common grid center and consecutive-dimension gaps.
void summarize_rate(ExperimentReport& report);

ExperimentReport run_rate_study(const RateStudyConfig& cfg);
ExperimentReport run_alignment_study(const AlignmentStudyConfig& cfg);
ExperimentReport run_glm_vs_linear(const GlmVsLinearConfig& cfg);

/// Deterministic serializations. JSON carries the full report including
/// per-replication records and failure messages; CSV is one row per
/// replication. Neither contains timestamps.
std::string report_to_json(const ExperimentReport& r);
std::string report_to_csv(const ExperimentReport& r);
/// Human-readable summary table (for stdout; content is deterministic).
std::string report_summary(const ExperimentReport& r);

}  // namespace tracereg
