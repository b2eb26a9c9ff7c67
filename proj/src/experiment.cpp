#include "windcal/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <climits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "windcal/scoring.hpp"
#include "windcal/synthetic.hpp"

namespace windcal {

namespace {

struct MetricDef {
  std::string name;
  enum Kind { crps, bs, qs, ae_median, se_mean } kind;
  double param = 0.0;
};

const std::vector<MetricDef>& metric_defs() {
  static const std::vector<MetricDef> defs = {
      {"CRPS", MetricDef::crps, 0.0},       {"BS@5", MetricDef::bs, 5.0},
      {"BS@10", MetricDef::bs, 10.0},       {"BS@15", MetricDef::bs, 15.0},
      {"QS@0.05", MetricDef::qs, 0.05},     {"QS@0.1", MetricDef::qs, 0.1},
      {"QS@0.2", MetricDef::qs, 0.2},       {"QS@0.8", MetricDef::qs, 0.8},
      {"QS@0.9", MetricDef::qs, 0.9},       {"QS@0.95", MetricDef::qs, 0.95},
      {"AE_median", MetricDef::ae_median, 0.0}, {"SE_mean", MetricDef::se_mean, 0.0}};
  return defs;
}

void run_tasks(std::vector<std::function<void()>>& tasks, int threads) {
  if (threads <= 1 || tasks.size() <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      tasks[i]();
    }
  };
  std::vector<std::thread> pool;
  int n = std::min<int>(threads, static_cast<int>(tasks.size()));
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

struct FitEntry {
  EmosCoefficients coeffs;
  enum Status { fitted, fallback_previous, fallback_regional } status = fitted;
};

// Per (strategy, combo): coefficients per [lead-1][date_idx][group].
using FitStore = std::vector<std::vector<std::unordered_map<std::string, FitEntry>>>;

struct Accumulator {
  KahanSum sum;
  std::size_t count = 0;
};

struct CsvWriter {
  std::ofstream out;
  bool enabled = false;
  void open(const std::string& path, const std::string& header) {
    out.open(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << header << '\n';
    enabled = true;
  }
};

}  // namespace

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Combo> parse_combos(const std::string& s) {
  std::vector<Combo> combos;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    int ml, mh;
    if (std::sscanf(part.c_str(), " %d , %d", &ml, &mh) != 2 || ml < 0 || mh < 0)
      throw std::invalid_argument("bad combination '" + part + "', expected M_L,M_H");
    combos.push_back({ml, mh});
  }
  if (combos.empty()) throw std::invalid_argument("no combinations given");
  return combos;
}

const std::vector<double>& ExperimentResult::series(const std::string& model,
                                                    const std::string& metric, int lead) const {
  auto mi = std::find(model_ids.begin(), model_ids.end(), model);
  auto ki = std::find(metric_names.begin(), metric_names.end(), metric);
  if (mi == model_ids.end()) throw std::invalid_argument("unknown model " + model);
  if (ki == metric_names.end()) throw std::invalid_argument("unknown metric " + metric);
  return daily_means[static_cast<std::size_t>(mi - model_ids.begin())]
                    [static_cast<std::size_t>(ki - metric_names.begin())]
                    [static_cast<std::size_t>(lead - 1)];
}

double ExperimentResult::mean_score(const std::string& model, const std::string& metric,
                                    int lead) const {
  for (const auto& row : summary)
    if (row.model_id == model && row.metric == metric && row.lead_time == lead) return row.mean;
  throw std::invalid_argument("no summary row for " + model + "/" + metric);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& dataset) {
  if (spec.combinations.empty()) throw std::invalid_argument("no combinations requested");
  if (spec.strategies.empty() && !spec.score_raw)
    throw std::invalid_argument("empty strategy list and raw scoring disabled: nothing to do");
  if (spec.reference &&
      std::find(spec.combinations.begin(), spec.combinations.end(), *spec.reference) ==
          spec.combinations.end())
    throw std::invalid_argument("reference combination " + spec.reference->label() +
                                " is not among the evaluated combinations");

  const int max_lead = dataset.max_lead_time();
  if (max_lead < 1) throw std::invalid_argument("dataset has no forecast cases");

  // Member availability.
  for (const Combo& combo : spec.combinations)
    for (const ForecastCase& c : dataset.cases())
      if (static_cast<std::size_t>(combo.m_low) > c.members_low.size() ||
          static_cast<std::size_t>(combo.m_high) > c.members_high.size())
        throw std::invalid_argument("combination " + combo.label() +
                                    " requests more members than the dataset provides");

  // Verification range: per lead, the span of verification dates with
  // observations; the default keeps a full window of history before the first
  // date and a date range covered by every lead.
  Date latest_first(INT32_MIN), earliest_last(INT32_MAX);
  {
    bool any = false;
    for (int lead = 1; lead <= max_lead; ++lead) {
      auto cases = dataset.cases_for_lead(lead);
      Date lo(INT32_MAX), hi(INT32_MIN);
      for (const auto& c : cases) {
        if (!c.observation) continue;
        lo = std::min(lo, c.verification_date());
        hi = std::max(hi, c.verification_date());
      }
      if (lo > hi) continue;
      any = true;
      latest_first = std::max(latest_first, lo);
      earliest_last = std::min(earliest_last, hi);
    }
    if (!any) throw std::invalid_argument("dataset has no verifiable cases");
  }
  const Date first_verif = spec.first_verification.value_or(latest_first + spec.window_days);
  const Date last_verif = spec.last_verification.value_or(earliest_last);
  if (first_verif > last_verif)
    throw std::invalid_argument("empty verification range (" + first_verif.iso() + " .. " +
                                last_verif.iso() + ")");
  if (first_verif - spec.window_days < latest_first)
    throw std::invalid_argument("verification range leaves less than window_days of history");
  const std::size_t n_dates = static_cast<std::size_t>(last_verif - first_verif) + 1;

  const auto& metrics = metric_defs();
  const std::size_t n_metrics = metrics.size();

  ExperimentResult result;
  result.first_verification = first_verif;
  result.last_verification = last_verif;
  for (const Combo& combo : spec.combinations) {
    if (spec.score_raw) result.model_ids.push_back("raw" + combo.label());
    for (Strategy s : spec.strategies)
      result.model_ids.push_back("emos-" + to_string(s) + combo.label());
  }
  for (const auto& m : metrics) result.metric_names.push_back(m.name);

  const std::size_t n_models = result.model_ids.size();
  std::vector<std::vector<std::vector<std::vector<Accumulator>>>> acc(
      n_models, std::vector<std::vector<std::vector<Accumulator>>>(
                    n_metrics, std::vector<std::vector<Accumulator>>(
                                   static_cast<std::size_t>(max_lead),
                                   std::vector<Accumulator>(n_dates))));

  namespace fs = std::filesystem;
  const bool writing = !spec.out_dir.empty();
  if (writing) fs::create_directories(spec.out_dir);

  CsvWriter scores;
  if (writing && spec.write_scores)
    scores.open((fs::path(spec.out_dir) / "scores.csv").string(),
                "model_id,station_id,date,lead_time,metric,value");
  CsvWriter clusters_csv;
  if (writing && spec.write_clusters)
    clusters_csv.open((fs::path(spec.out_dir) / "clusters.csv").string(),
                      "date,lead_time,station_id,cluster_id");

  std::FILE* coeff_file = nullptr;
  bool coeff_first = true;
  if (writing) {
    coeff_file = std::fopen((fs::path(spec.out_dir) / "coefficients.json").string().c_str(), "w");
    if (!coeff_file) throw std::runtime_error("cannot write coefficients.json");
    std::fputs("[\n", coeff_file);
  }

  struct ReportEvent {
    std::string model_id, group_id;
    Date date;
    int lead;
    std::string status;
  };
  std::vector<ReportEvent> events;

  auto emit_cell = [&](std::size_t model_idx, const ForecastCase& c, std::size_t metric_idx,
                       double value) {
    std::size_t date_idx = static_cast<std::size_t>(c.verification_date() - first_verif);
    auto& a = acc[model_idx][metric_idx][static_cast<std::size_t>(c.lead_time - 1)][date_idx];
    a.sum.add(value);
    ++a.count;
    if (scores.enabled)
      scores.out << result.model_ids[model_idx] << ','
                 << dataset.stations()[c.station_index].station_id << ','
                 << c.verification_date().iso() << ',' << c.lead_time << ','
                 << metrics[metric_idx].name << ',' << format_value(value) << '\n';
  };

  std::size_t model_idx = 0;
  for (const Combo& combo : spec.combinations) {
    // Prefix summaries for this combo, indexed by position in dataset.cases().
    const ForecastCase* base = dataset.cases().data();
    std::vector<EnsembleSummary> summaries(dataset.cases().size());
    {
      std::vector<std::function<void()>> tasks;
      const std::size_t chunk = 16384;
      for (std::size_t beg = 0; beg < summaries.size(); beg += chunk) {
        std::size_t end = std::min(beg + chunk, summaries.size());
        tasks.push_back([&, beg, end]() {
          for (std::size_t i = beg; i < end; ++i) {
            const ForecastCase& c = base[i];
            summaries[i] = summarize(
                std::span<const double>(c.members_low.data(),
                                        static_cast<std::size_t>(combo.m_low)),
                std::span<const double>(c.members_high.data(),
                                        static_cast<std::size_t>(combo.m_high)));
          }
        });
      }
      run_tasks(tasks, spec.threads);
    }

    auto in_range = [&](const ForecastCase& c) {
      Date v = c.verification_date();
      return v >= first_verif && v <= last_verif && c.observation.has_value();
    };

    if (spec.score_raw) {
      for (int lead = 1; lead <= max_lead; ++lead) {
        for (const ForecastCase& c : dataset.cases_for_lead(lead)) {
          if (!in_range(c)) continue;
          std::vector<double> members;
          members.reserve(static_cast<std::size_t>(combo.m_low + combo.m_high));
          members.insert(members.end(), c.members_low.begin(),
                         c.members_low.begin() + combo.m_low);
          members.insert(members.end(), c.members_high.begin(),
                         c.members_high.begin() + combo.m_high);
          const double y = *c.observation;
          for (std::size_t k = 0; k < n_metrics; ++k) {
            double v = 0.0;
            switch (metrics[k].kind) {
              case MetricDef::crps: v = crps_ensemble(members, y, spec.fair_crps); break;
              case MetricDef::bs: v = brier_ensemble(members, y, metrics[k].param); break;
              case MetricDef::qs: v = quantile_score_ensemble(members, y, metrics[k].param); break;
              case MetricDef::ae_median: v = point_errors_ensemble(members, y).ae_median; break;
              case MetricDef::se_mean: v = point_errors_ensemble(members, y).se_mean; break;
            }
            emit_cell(model_idx, c, k, v);
          }
        }
      }
      ++model_idx;
    }

    for (Strategy strategy : spec.strategies) {
      const std::string model_id = result.model_ids[model_idx];
      const EmosMode mode = combo.mode();

      TrainingPlan plan;
      plan.strategy = strategy;
      plan.window_days = spec.window_days;
      plan.cluster_count = spec.cluster_count;
      plan.quantile_count = spec.quantile_count;
      plan.seed = spec.seed;
      plan.validate(dataset.stations().size());

      FitSettings cold = spec.fit;
      cold.min_training_cases = spec.min_training_cases;
      FitSettings warm = cold;
      warm.initial_step = spec.warm_start_step;

      FitStore store(static_cast<std::size_t>(max_lead),
                     std::vector<std::unordered_map<std::string, FitEntry>>(n_dates));
      // semi-local assignments per [lead-1][date_idx]
      std::vector<std::vector<std::vector<int>>> assignments;
      if (strategy == Strategy::semi_local)
        assignments.assign(static_cast<std::size_t>(max_lead),
                           std::vector<std::vector<int>>(n_dates));

      std::mutex events_mutex;
      std::atomic<std::size_t> attempted{0}, skipped{0}, fb_prev{0}, fb_reg{0};

      auto make_training = [&](const std::vector<const ForecastCase*>& cases) {
        std::vector<TrainingCase> tc;
        tc.reserve(cases.size());
        for (const ForecastCase* c : cases)
          tc.push_back({summaries[static_cast<std::size_t>(c - base)], *c->observation});
        return tc;
      };

      // Fits one (lead, group-filter) chain over all verification dates with
      // warm starts; regional fallback fits cold on the full window.
      auto fit_chain = [&](int lead, auto group_of, auto group_filter) {
        std::optional<EmosCoefficients> warm_start;
        std::unordered_map<std::string, EmosCoefficients> last_good;
        for (std::size_t di = 0; di < n_dates; ++di) {
          Date target = first_verif + static_cast<int>(di);
          auto window = rolling_window(dataset, target, lead, spec.window_days);
          std::vector<const ForecastCase*> selected;
          for (const ForecastCase* c : window)
            if (group_filter(c)) selected.push_back(c);
          std::string group = group_of();
          ++attempted;
          auto training = make_training(selected);
          std::optional<EmosCoefficients> fitted;
          if (warm_start)
            fitted = fit(training, mode, warm_start, warm);
          else
            fitted = fit(training, mode, std::nullopt, cold);
          if (fitted) {
            warm_start = fitted;
            store[static_cast<std::size_t>(lead - 1)][di][group] = {*fitted, FitEntry::fitted};
          } else {
            ++skipped;
            if (warm_start) {
              ++fb_prev;
              store[static_cast<std::size_t>(lead - 1)][di][group] = {*warm_start,
                                                                     FitEntry::fallback_previous};
              std::lock_guard lock(events_mutex);
              events.push_back({model_id, group, target, lead, "fallback_previous"});
            } else {
              auto regional = fit(make_training(window), mode, std::nullopt, cold);
              if (regional) {
                ++fb_reg;
                store[static_cast<std::size_t>(lead - 1)][di][group] = {
                    *regional, FitEntry::fallback_regional};
                std::lock_guard lock(events_mutex);
                events.push_back({model_id, group, target, lead, "fallback_regional"});
              } else {
                std::lock_guard lock(events_mutex);
                events.push_back({model_id, group, target, lead, "unfitted"});
              }
            }
          }
        }
      };

      std::vector<std::function<void()>> tasks;
      if (strategy == Strategy::regional) {
        for (int lead = 1; lead <= max_lead; ++lead)
          tasks.push_back([&, lead]() {
            fit_chain(lead, []() { return std::string("region"); },
                      [](const ForecastCase*) { return true; });
          });
      } else if (strategy == Strategy::local) {
        for (int lead = 1; lead <= max_lead; ++lead)
          for (std::uint32_t st = 0; st < dataset.stations().size(); ++st)
            tasks.push_back([&, lead, st]() {
              fit_chain(lead,
                        [&, st]() { return dataset.stations()[st].station_id; },
                        [st](const ForecastCase* c) { return c->station_index == st; });
            });
      } else {
        for (int lead = 1; lead <= max_lead; ++lead)
          tasks.push_back([&, lead]() {
            // Clusters are recomputed per verification date; groups then fit
            // with warm starts keyed by cluster label.
            std::unordered_map<std::string, EmosCoefficients> warm_by_group;
            for (std::size_t di = 0; di < n_dates; ++di) {
              Date target = first_verif + static_cast<int>(di);
              auto cluster =
                  cluster_stations(dataset, plan, lead, target, combo.m_low, combo.m_high);
              assignments[static_cast<std::size_t>(lead - 1)][di] = cluster.assignment;
              auto window = rolling_window(dataset, target, lead, spec.window_days);
              for (int g = 0; g < plan.cluster_count; ++g) {
                std::vector<const ForecastCase*> selected;
                for (const ForecastCase* c : window)
                  if (cluster.assignment[c->station_index] == g) selected.push_back(c);
                std::string group = "cluster" + std::to_string(g);
                ++attempted;
                auto it = warm_by_group.find(group);
                std::optional<EmosCoefficients> warm_start =
                    it == warm_by_group.end() ? std::nullopt
                                              : std::optional<EmosCoefficients>(it->second);
                auto fitted = fit(make_training(selected), mode, warm_start,
                                  warm_start ? warm : cold);
                if (fitted) {
                  warm_by_group[group] = *fitted;
                  store[static_cast<std::size_t>(lead - 1)][di][group] = {*fitted,
                                                                          FitEntry::fitted};
                } else {
                  ++skipped;
                  if (warm_start) {
                    ++fb_prev;
                    store[static_cast<std::size_t>(lead - 1)][di][group] = {
                        *warm_start, FitEntry::fallback_previous};
                    std::lock_guard lock(events_mutex);
                    events.push_back({model_id, group, target, lead, "fallback_previous"});
                  } else {
                    auto regional = fit(make_training(window), mode, std::nullopt, cold);
                    if (regional) {
                      ++fb_reg;
                      store[static_cast<std::size_t>(lead - 1)][di][group] = {
                          *regional, FitEntry::fallback_regional};
                      std::lock_guard lock(events_mutex);
                      events.push_back({model_id, group, target, lead, "fallback_regional"});
                    } else {
                      std::lock_guard lock(events_mutex);
                      events.push_back({model_id, group, target, lead, "unfitted"});
                    }
                  }
                }
              }
            }
          });
      }
      run_tasks(tasks, spec.threads);
      result.fits_attempted += attempted;
      result.fits_skipped += skipped;
      result.fallbacks_previous += fb_prev;
      result.fallbacks_regional += fb_reg;

      // Persist coefficients (deterministic order: lead, date, group).
      if (coeff_file) {
        for (int lead = 1; lead <= max_lead; ++lead)
          for (std::size_t di = 0; di < n_dates; ++di) {
            auto& by_group = store[static_cast<std::size_t>(lead - 1)][di];
            std::vector<std::string> keys;
            keys.reserve(by_group.size());
            for (const auto& [g, e] : by_group) keys.push_back(g);
            std::sort(keys.begin(), keys.end());
            for (const auto& g : keys) {
              const FitEntry& e = by_group[g];
              if (e.status != FitEntry::fitted) continue;
              std::fprintf(
                  coeff_file,
                  "%s  {\"model_id\":\"%s\",\"date\":\"%s\",\"lead_time\":%d,\"group_id\":\"%s\","
                  "\"mode\":\"%s\",\"a\":%.17g,\"b_high\":%.17g,\"b_low\":%.17g,\"c\":%.17g,"
                  "\"d\":%.17g,\"objective\":%.17g,\"converged\":%s}",
                  coeff_first ? "" : ",\n", model_id.c_str(),
                  (first_verif + static_cast<int>(di)).iso().c_str(), lead, g.c_str(),
                  to_string(e.coeffs.mode).c_str(), e.coeffs.a, e.coeffs.b_high, e.coeffs.b_low,
                  e.coeffs.c, e.coeffs.d, e.coeffs.fit_meta.objective,
                  e.coeffs.fit_meta.converged ? "true" : "false");
              coeff_first = false;
            }
          }
      }

      if (clusters_csv.enabled && strategy == Strategy::semi_local) {
        for (int lead = 1; lead <= max_lead; ++lead)
          for (std::size_t di = 0; di < n_dates; ++di) {
            const auto& assign = assignments[static_cast<std::size_t>(lead - 1)][di];
            for (std::size_t st = 0; st < assign.size(); ++st)
              clusters_csv.out << (first_verif + static_cast<int>(di)).iso() << ',' << lead << ','
                               << dataset.stations()[st].station_id << ',' << assign[st] << '\n';
          }
      }

      // Scoring pass.
      for (int lead = 1; lead <= max_lead; ++lead) {
        for (const ForecastCase& c : dataset.cases_for_lead(lead)) {
          if (!in_range(c)) continue;
          std::size_t di = static_cast<std::size_t>(c.verification_date() - first_verif);
          std::string group;
          switch (strategy) {
            case Strategy::regional: group = "region"; break;
            case Strategy::local: group = dataset.stations()[c.station_index].station_id; break;
            case Strategy::semi_local:
              group = "cluster" + std::to_string(assignments[static_cast<std::size_t>(lead - 1)]
                                                            [di][c.station_index]);
              break;
          }
          auto& by_group = store[static_cast<std::size_t>(lead - 1)][di];
          auto it = by_group.find(group);
          if (it == by_group.end()) {
            ++result.cells_unscored;
            continue;
          }
          TruncatedNormal tn = link(it->second.coeffs, summaries[static_cast<std::size_t>(&c - base)]);
          const double y = *c.observation;
          for (std::size_t k = 0; k < n_metrics; ++k) {
            double v = 0.0;
            switch (metrics[k].kind) {
              case MetricDef::crps: v = crps_tn(tn, y); break;
              case MetricDef::bs: v = brier(tn, y, metrics[k].param); break;
              case MetricDef::qs: v = quantile_score(tn, y, metrics[k].param); break;
              case MetricDef::ae_median: v = point_errors(tn, y).ae_median; break;
              case MetricDef::se_mean: v = point_errors(tn, y).se_mean; break;
            }
            emit_cell(model_idx, c, k, v);
          }
        }
      }
      ++model_idx;
    }
  }

  if (coeff_file) {
    std::fputs("\n]\n", coeff_file);
    std::fclose(coeff_file);
  }

  // Daily-mean series and overall means.
  result.daily_means.assign(
      n_models, std::vector<std::vector<std::vector<double>>>(
                    n_metrics, std::vector<std::vector<double>>(
                                   static_cast<std::size_t>(max_lead))));
  for (std::size_t m = 0; m < n_models; ++m)
    for (std::size_t k = 0; k < n_metrics; ++k)
      for (int lead = 1; lead <= max_lead; ++lead) {
        auto& series = result.daily_means[m][k][static_cast<std::size_t>(lead - 1)];
        for (std::size_t di = 0; di < n_dates; ++di) {
          const auto& a = acc[m][k][static_cast<std::size_t>(lead - 1)][di];
          if (a.count > 0) series.push_back(a.sum.value() / static_cast<double>(a.count));
        }
      }

  // Reference model per model: the same class/strategy at the reference combo.
  auto reference_model = [&](const std::string& model) -> std::optional<std::string> {
    if (!spec.reference) return std::nullopt;
    auto pos = model.find('(');
    std::string ref = model.substr(0, pos) + spec.reference->label();
    if (ref == model) return ref;  // self-reference: skill 0, width 0
    if (std::find(result.model_ids.begin(), result.model_ids.end(), ref) ==
        result.model_ids.end())
      return std::nullopt;
    return ref;
  };

  for (std::size_t m = 0; m < n_models; ++m) {
    for (std::size_t k = 0; k < n_metrics; ++k) {
      for (int lead = 1; lead <= max_lead; ++lead) {
        KahanSum total;
        std::size_t count = 0;
        for (std::size_t di = 0; di < n_dates; ++di) {
          const auto& a = acc[m][k][static_cast<std::size_t>(lead - 1)][di];
          total.add(a.sum.value());
          count += a.count;
        }
        if (count == 0) continue;
        SummaryRow row;
        row.model_id = result.model_ids[m];
        row.metric = metrics[k].name;
        row.lead_time = lead;
        row.mean = total.value() / static_cast<double>(count);
        if (auto ref = reference_model(row.model_id)) {
          const auto& s = result.daily_means[m][k][static_cast<std::size_t>(lead - 1)];
          const auto& r = result.series(*ref, metrics[k].name, lead);
          if (s.size() == r.size() && s.size() >= 2) {
            BootstrapSettings bs = spec.bootstrap;
            bs.seed = spec.bootstrap.seed ? spec.bootstrap.seed : spec.seed;
            try {
              row.skill = skill_ci(s, r, bs);
            } catch (const std::domain_error&) {
              // reference score (or a replicate of it) is not positive: the
              // skill score is undefined for this cell, leave it blank
            }
          }
        }
        result.summary.push_back(std::move(row));
      }
    }
  }

  if (writing) {
    std::ofstream f(fs::path(spec.out_dir) / "summary.csv");
    f << "model_id,metric,lead_time,mean,skill_vs_ref,ci_low,ci_high\n";
    for (const auto& row : result.summary) {
      f << row.model_id << ',' << row.metric << ',' << row.lead_time << ','
        << format_value(row.mean) << ',';
      if (row.skill)
        f << format_value(row.skill->skill) << ',' << format_value(row.skill->ci_low) << ','
          << format_value(row.skill->ci_high);
      else
        f << ",,";
      f << '\n';
    }
  }

  if (writing) {
    std::ofstream f(fs::path(spec.out_dir) / "run_report.json");
    f << "{\n  \"fits_attempted\": " << result.fits_attempted
      << ",\n  \"fits_skipped\": " << result.fits_skipped
      << ",\n  \"fallbacks_previous\": " << result.fallbacks_previous
      << ",\n  \"fallbacks_regional\": " << result.fallbacks_regional
      << ",\n  \"cells_unscored\": " << result.cells_unscored << ",\n  \"events\": [\n";
    std::sort(events.begin(), events.end(), [](const ReportEvent& a, const ReportEvent& b) {
      return std::tie(a.model_id, a.lead, a.date, a.group_id) <
             std::tie(b.model_id, b.lead, b.date, b.group_id);
    });
    for (std::size_t i = 0; i < events.size(); ++i)
      f << "    {\"model_id\":\"" << events[i].model_id << "\",\"group_id\":\""
        << events[i].group_id << "\",\"date\":\"" << events[i].date.iso()
        << "\",\"lead_time\":" << events[i].lead << ",\"status\":\"" << events[i].status << "\"}"
        << (i + 1 < events.size() ? ",\n" : "\n");
    f << "  ]\n}\n";
  }

  if (writing) write_reports(result.summary, spec.out_dir);
  return result;
}

}  // namespace windcal
