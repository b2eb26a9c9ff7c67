#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "windcal/experiment.hpp"

namespace windcal {

namespace {

// Wong colorblind-safe palette.
const char* kPalette[8] = {"#0072B2", "#D55E00", "#009E73", "#E69F00",
                           "#CC79A7", "#56B4E9", "#F0E442", "#000000"};

std::string sanitize(const std::string& metric) {
  std::string s = metric;
  for (char& c : s) {
    if (c == '@') c = '_';
    if (c == '.') c = 'p';
  }
  return s;
}

struct Series {
  std::vector<int> leads;
  std::vector<double> means;
  std::vector<double> skills, ci_low, ci_high;
  bool has_skill = false;
};

struct Panel {
  double x0, y0, w, h;  // plot area in SVG coordinates
  double lead_min, lead_max, v_min, v_max;

  double x(double lead) const { return x0 + (lead - lead_min) / (lead_max - lead_min) * w; }
  double y(double v) const { return y0 + h - (v - v_min) / (v_max - v_min) * h; }
};

void draw_axes(std::ostream& out, const Panel& p, const std::string& title,
               const std::string& ylabel) {
  out << "<rect x='" << p.x0 << "' y='" << p.y0 << "' width='" << p.w << "' height='" << p.h
      << "' fill='none' stroke='#333'/>\n";
  out << "<text x='" << p.x0 + p.w / 2 << "' y='" << p.y0 - 8
      << "' text-anchor='middle' font-size='13'>" << title << "</text>\n";
  out << "<text x='" << p.x0 + p.w / 2 << "' y='" << p.y0 + p.h + 30
      << "' text-anchor='middle' font-size='11'>lead time (days)</text>\n";
  out << "<text x='" << p.x0 - 42 << "' y='" << p.y0 + p.h / 2
      << "' text-anchor='middle' font-size='11' transform='rotate(-90 " << p.x0 - 42 << " "
      << p.y0 + p.h / 2 << ")'>" << ylabel << "</text>\n";
  for (int lead = static_cast<int>(p.lead_min); lead <= static_cast<int>(p.lead_max); ++lead) {
    if ((lead - static_cast<int>(p.lead_min)) % 2 != 0) continue;
    out << "<text x='" << p.x(lead) << "' y='" << p.y0 + p.h + 14
        << "' text-anchor='middle' font-size='9'>" << lead << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    double v = p.v_min + (p.v_max - p.v_min) * i / 4.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    out << "<text x='" << p.x0 - 5 << "' y='" << p.y(v) + 3
        << "' text-anchor='end' font-size='9'>" << buf << "</text>\n";
  }
}

void polyline(std::ostream& out, const Panel& p, const std::vector<int>& leads,
              const std::vector<double>& values, const char* color) {
  out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
  for (std::size_t i = 0; i < leads.size(); ++i)
    out << p.x(leads[i]) << ',' << p.y(values[i]) << ' ';
  out << "'/>\n";
}

void ribbon(std::ostream& out, const Panel& p, const std::vector<int>& leads,
            const std::vector<double>& lo, const std::vector<double>& hi, const char* color) {
  out << "<polygon fill='" << color << "' fill-opacity='0.15' stroke='none' points='";
  for (std::size_t i = 0; i < leads.size(); ++i)
    out << p.x(leads[i]) << ',' << p.y(hi[i]) << ' ';
  for (std::size_t i = leads.size(); i-- > 0;)
    out << p.x(leads[i]) << ',' << p.y(lo[i]) << ' ';
  out << "'/>\n";
}

}  // namespace

void write_reports(const std::vector<SummaryRow>& summary, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::set<std::string> metrics;
  for (const auto& row : summary) metrics.insert(row.metric);

  for (const auto& metric : metrics) {
    // model -> series, models in first-appearance order
    std::vector<std::string> models;
    std::map<std::string, Series> by_model;
    for (const auto& row : summary) {
      if (row.metric != metric) continue;
      if (!by_model.count(row.model_id)) models.push_back(row.model_id);
      Series& s = by_model[row.model_id];
      s.leads.push_back(row.lead_time);
      s.means.push_back(row.mean);
      if (row.skill) {
        s.has_skill = true;
        s.skills.push_back(row.skill->skill);
        s.ci_low.push_back(row.skill->ci_low);
        s.ci_high.push_back(row.skill->ci_high);
      }
    }

    // CSV mirror of every plotted series.
    {
      std::ofstream csv(fs::path(out_dir) / ("report_" + sanitize(metric) + ".csv"));
      csv << "model_id,metric,lead_time,mean,skill_vs_ref,ci_low,ci_high\n";
      for (const auto& model : models) {
        const Series& s = by_model[model];
        for (std::size_t i = 0; i < s.leads.size(); ++i) {
          csv << model << ',' << metric << ',' << s.leads[i] << ',' << format_value(s.means[i])
              << ',';
          if (s.has_skill && i < s.skills.size())
            csv << format_value(s.skills[i]) << ',' << format_value(s.ci_low[i]) << ','
                << format_value(s.ci_high[i]);
          else
            csv << ",,";
          csv << '\n';
        }
      }
    }

    int lead_min = 99, lead_max = 1;
    double mean_lo = 1e300, mean_hi = -1e300;
    double skill_lo = 0.0, skill_hi = 0.0;
    bool any_skill = false;
    for (const auto& model : models) {
      const Series& s = by_model[model];
      for (std::size_t i = 0; i < s.leads.size(); ++i) {
        lead_min = std::min(lead_min, s.leads[i]);
        lead_max = std::max(lead_max, s.leads[i]);
        mean_lo = std::min(mean_lo, s.means[i]);
        mean_hi = std::max(mean_hi, s.means[i]);
      }
      if (s.has_skill)
        for (std::size_t i = 0; i < s.skills.size(); ++i) {
          any_skill = true;
          skill_lo = std::min({skill_lo, s.ci_low[i]});
          skill_hi = std::max({skill_hi, s.ci_high[i]});
        }
    }
    if (lead_max == lead_min) ++lead_max;
    double pad = 0.05 * std::max(1e-12, mean_hi - mean_lo);
    mean_lo -= pad;
    mean_hi += pad;
    double spad = 0.05 * std::max(1e-12, skill_hi - skill_lo);
    skill_lo -= spad;
    skill_hi += spad;

    std::ofstream out(fs::path(out_dir) / ("report_" + sanitize(metric) + ".svg"));
    out << "<svg xmlns='http://www.w3.org/2000/svg' viewBox='0 0 900 500' width='900' "
           "height='500'>\n<rect width='900' height='500' fill='white'/>\n";

    Panel mean_panel{70, 40, any_skill ? 330.0 : 740.0, 330, static_cast<double>(lead_min),
                     static_cast<double>(lead_max), mean_lo, mean_hi};
    draw_axes(out, mean_panel, metric + " (mean)", metric);
    for (std::size_t mi = 0; mi < models.size(); ++mi)
      polyline(out, mean_panel, by_model[models[mi]].leads, by_model[models[mi]].means,
               kPalette[mi % 8]);

    if (any_skill) {
      Panel skill_panel{500, 40, 330, 330, static_cast<double>(lead_min),
                        static_cast<double>(lead_max), skill_lo, skill_hi};
      draw_axes(out, skill_panel, metric + " skill vs reference", "skill score");
      if (skill_lo < 0.0 && skill_hi > 0.0)
        out << "<line x1='" << skill_panel.x(lead_min) << "' y1='" << skill_panel.y(0.0)
            << "' x2='" << skill_panel.x(lead_max) << "' y2='" << skill_panel.y(0.0)
            << "' stroke='#888' stroke-dasharray='4 3'/>\n";
      for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const Series& s = by_model[models[mi]];
        if (!s.has_skill) continue;
        ribbon(out, skill_panel, s.leads, s.ci_low, s.ci_high, kPalette[mi % 8]);
        polyline(out, skill_panel, s.leads, s.skills, kPalette[mi % 8]);
      }
    }

    // legend
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      double y = 415 + 16 * static_cast<double>(mi % 5);
      double x = 70 + 280 * static_cast<double>(mi / 5);
      out << "<line x1='" << x << "' y1='" << y << "' x2='" << x + 24 << "' y2='" << y
          << "' stroke='" << kPalette[mi % 8] << "' stroke-width='2'/>\n<text x='" << x + 30
          << "' y='" << y + 4 << "' font-size='11'>" << models[mi] << "</text>\n";
    }
    out << "</svg>\n";
  }
}

void report_from_summary_file(const std::string& summary_csv, const std::string& out_dir,
                              const std::vector<std::string>& metrics) {
  std::ifstream f(summary_csv);
  if (!f) throw std::runtime_error("cannot open " + summary_csv);
  std::string line;
  std::getline(f, line);  // header
  std::vector<SummaryRow> rows;
  std::set<std::string> available;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    // getline drops trailing empty fields; restore them from the comma count
    std::size_t commas = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    while (fields.size() < commas + 1) fields.emplace_back();
    if (fields.size() < 7) throw std::runtime_error("malformed summary row: " + line);
    // Model ids such as "raw(100,50)" contain a comma; everything before the
    // last six fields belongs to the model id.
    std::size_t extra = fields.size() - 7;
    std::string model = fields[0];
    for (std::size_t i = 1; i <= extra; ++i) model += "," + fields[i];
    SummaryRow row;
    row.model_id = std::move(model);
    row.metric = fields[extra + 1];
    row.lead_time = std::stoi(fields[extra + 2]);
    row.mean = std::stod(fields[extra + 3]);
    if (!fields[extra + 4].empty())
      row.skill = SkillSummary{std::stod(fields[extra + 4]), std::stod(fields[extra + 5]),
                               std::stod(fields[extra + 6])};
    available.insert(row.metric);
    rows.push_back(std::move(row));
  }
  if (!metrics.empty()) {
    for (const auto& m : metrics)
      if (!available.count(m)) {
        std::string list;
        for (const auto& a : available) list += (list.empty() ? "" : ", ") + a;
        throw std::invalid_argument("unknown metric '" + m + "'; available: " + list);
      }
    std::erase_if(rows, [&](const SummaryRow& r) {
      return std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end();
    });
  }
  write_reports(rows, out_dir);
}

}  // namespace windcal
