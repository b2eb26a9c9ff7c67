#pragma once

#include <optional>
#include <string>
#include <vector>

#include "windcal/bootstrap.hpp"
#include "windcal/dataset.hpp"
#include "windcal/emos.hpp"
#include "windcal/training.hpp"

namespace windcal {

// An (M_L, M_H) member combination.
struct Combo {
  int m_low = 0;
  int m_high = 0;
  std::string label() const {
    return "(" + std::to_string(m_low) + "," + std::to_string(m_high) + ")";
  }
  EmosMode mode() const {
    if (m_low == 0) return EmosMode::pure_high;
    if (m_high == 0) return EmosMode::pure_low;
    return EmosMode::dual;
  }
  bool operator==(const Combo&) const = default;
};

// Parses "100,0;0,50;100,50".
std::vector<Combo> parse_combos(const std::string& s);

struct ExperimentSpec {
  std::vector<Combo> combinations;
  std::vector<Strategy> strategies;
  int window_days = 60;
  int cluster_count = 90;
  int quantile_count = 12;
  std::optional<Combo> reference;  // skill reference; models compare within their own class
  std::optional<Date> first_verification;  // default: earliest date with a full window
  std::optional<Date> last_verification;   // default: last date covered by every lead
  std::string out_dir;
  std::uint64_t seed = 1;
  int threads = 1;
  BootstrapSettings bootstrap;
  FitSettings fit;
  double warm_start_step = 0.05;
  bool score_raw = true;
  bool write_scores = true;
  bool write_clusters = false;
  bool fair_crps = false;
  std::size_t min_training_cases = 10;
};

struct SummaryRow {
  std::string model_id;
  std::string metric;
  int lead_time = 0;
  double mean = 0.0;
  std::optional<SkillSummary> skill;  // vs the spec's reference, same model class
};

struct ExperimentResult {
  std::vector<SummaryRow> summary;
  Date first_verification;
  Date last_verification;
  // (model, metric, lead) -> per-date mean-score series, date-ascending
  std::vector<std::string> model_ids;
  std::vector<std::string> metric_names;
  std::vector<std::vector<std::vector<std::vector<double>>>> daily_means;  // [model][metric][lead-1][date]
  std::size_t fits_attempted = 0;
  std::size_t fits_skipped = 0;
  std::size_t fallbacks_previous = 0;
  std::size_t fallbacks_regional = 0;
  std::size_t cells_unscored = 0;

  const std::vector<double>& series(const std::string& model, const std::string& metric,
                                    int lead) const;
  double mean_score(const std::string& model, const std::string& metric, int lead) const;
};

// Full pipeline: fit, score, aggregate, bootstrap, and (when out_dir is set)
// write scores.csv, summary.csv, coefficients.json, run_report.json, the
// per-metric SVG reports and their CSV mirrors.
ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& dataset);

// SVG report generation from summary rows (one SVG + CSV mirror per metric).
void write_reports(const std::vector<SummaryRow>& summary, const std::string& out_dir);

// Re-reads a summary.csv and regenerates the SVG reports.
void report_from_summary_file(const std::string& summary_csv, const std::string& out_dir,
                              const std::vector<std::string>& metrics = {});

std::string format_value(double v);  // canonical numeric formatting for all CSV output

}  // namespace windcal
