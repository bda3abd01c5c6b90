#include "htnagent/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "htnagent/errors.hpp"
#include "htnagent/text.hpp"

namespace htnagent {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
const char* kPhaseColors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52"};
const char* kPhaseNames[] = {"action_llm", "verify_llm", "environment", "solver"};

double phase(const PhaseTimes& t, int i) {
  switch (i) {
    case 0: return t.action_llm;
    case 1: return t.verify_llm;
    case 2: return t.environment;
    default: return t.solver;
  }
}

}  // namespace

std::string summary_csv(const BatchResult& result) {
  std::string out =
      "domain,cell,condition,trials,successes,rate,ci_lo,ci_hi,mean_iterations,"
      "mean_action_llm_s,mean_verify_llm_s,mean_environment_s,mean_solver_s,timeouts,"
      "infra_errors\n";
  for (const auto& c : result.cells) {
    out += std::string(domain_name(result.domain)) + "," + csv_field(c.label) + "," +
           std::string(condition_name(c.condition)) + "," + std::to_string(c.trials) + "," +
           std::to_string(c.successes) + "," + opt_num(c.rate) + "," +
           (c.interval ? num(c.interval->lo) : "") + "," + (c.interval ? num(c.interval->hi) : "") +
           "," + num(c.mean_iterations) + "," + num(c.mean_wall_times.action_llm) + "," +
           num(c.mean_wall_times.verify_llm) + "," + num(c.mean_wall_times.environment) + "," +
           num(c.mean_wall_times.solver) + "," + std::to_string(c.timeouts) + "," +
           std::to_string(c.infra_errors) + "\n";
  }
  return out;
}

std::string runtime_csv(const BatchResult& result) {
  std::string out =
      "domain,condition,episodes,mean_action_llm_s,mean_verify_llm_s,mean_environment_s,"
      "mean_solver_s,mean_total_s\n";
  for (const auto& p : result.pooled) {
    const auto& t = p.mean_wall_times;
    out += std::string(domain_name(result.domain)) + "," + std::string(condition_name(p.condition)) +
           "," + std::to_string(p.episodes) + "," + num(t.action_llm) + "," + num(t.verify_llm) +
           "," + num(t.environment) + "," + num(t.solver) + "," + num(t.total()) + "\n";
  }
  return out;
}

std::string success_svg(const BatchResult& result) {
  std::vector<std::string> labels;
  for (const auto& c : result.cells) {
    if (std::find(labels.begin(), labels.end(), c.label) == labels.end()) labels.push_back(c.label);
  }
  const auto& conds = result.condition_order;
  const double left = 60, top = 40, plot_h = 240, bar_w = 22, gap = 24;
  const double group_w = bar_w * static_cast<double>(std::max<std::size_t>(conds.size(), 1)) + gap;
  const double width = left + group_w * static_cast<double>(std::max<std::size_t>(labels.size(), 1)) + 160;
  const double height = top + plot_h + 60;
  auto y_of = [&](double rate) { return top + plot_h * (1.0 - rate); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                  num(height) + "\" data-chart=\"success\">\n";
  s += "<text x=\"" + num(left) + "\" y=\"20\" font-size=\"14\">" +
       xml_escape(std::string(domain_name(result.domain))) +
       " success rate (95% Wilson interval)</text>\n";
  s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
       num(top + plot_h) + "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick / 4.0;
    s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y_of(v) + 4) +
         "\" font-size=\"10\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  for (std::size_t g = 0; g < labels.size(); ++g) {
    const double gx = left + gap / 2 + group_w * static_cast<double>(g);
    for (std::size_t ci = 0; ci < conds.size(); ++ci) {
      auto it = std::find_if(result.cells.begin(), result.cells.end(), [&](const CellResult& c) {
        return c.label == labels[g] && c.condition == conds[ci];
      });
      if (it == result.cells.end() || !it->rate) continue;
      const double x = gx + bar_w * static_cast<double>(ci);
      const double rate = *it->rate;
      s += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(y_of(rate)) + "\" width=\"" +
           num(bar_w - 2) + "\" height=\"" + num(plot_h * rate) + "\" fill=\"" +
           kPalette[ci % 5] + "\" data-cell=\"" + xml_escape(labels[g]) + "\" data-condition=\"" +
           std::string(condition_name(conds[ci])) + "\" data-rate=\"" + num(rate) +
           "\" data-lo=\"" + num(it->interval->lo) + "\" data-hi=\"" + num(it->interval->hi) +
           "\"/>\n";
      const double cx = x + (bar_w - 2) / 2;
      s += "<line class=\"whisker\" x1=\"" + num(cx) + "\" y1=\"" + num(y_of(it->interval->lo)) +
           "\" x2=\"" + num(cx) + "\" y2=\"" + num(y_of(it->interval->hi)) +
           "\" stroke=\"black\" data-lo=\"" + num(it->interval->lo) + "\" data-hi=\"" +
           num(it->interval->hi) + "\"/>\n";
    }
    s += "<text x=\"" + num(gx) + "\" y=\"" + num(top + plot_h + 16) + "\" font-size=\"10\">" +
         xml_escape(labels[g]) + "</text>\n";
  }
  const double lx = width - 140;
  s += "<g class=\"legend\">\n";
  for (std::size_t ci = 0; ci < conds.size(); ++ci) {
    const double ly = top + 18 * static_cast<double>(ci);
    s += "<rect x=\"" + num(lx) + "\" y=\"" + num(ly) + "\" width=\"12\" height=\"12\" fill=\"" +
         kPalette[ci % 5] + "\"/><text class=\"legend-item\" x=\"" + num(lx + 18) + "\" y=\"" +
         num(ly + 10) + "\" font-size=\"11\">" + std::string(condition_name(conds[ci])) +
         "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

std::string runtime_svg(const BatchResult& result) {
  double max_total = 0;
  for (const auto& p : result.pooled) max_total = std::max(max_total, p.mean_wall_times.total());
  if (max_total <= 0) max_total = 1;
  const double left = 60, top = 40, plot_h = 240, bar_w = 40, gap = 30;
  const double width = left + (bar_w + gap) * static_cast<double>(std::max<std::size_t>(result.pooled.size(), 1)) + 160;
  const double height = top + plot_h + 60;

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
                  num(height) + "\" data-chart=\"runtime\">\n";
  s += "<text x=\"" + num(left) + "\" y=\"20\" font-size=\"14\">" +
       xml_escape(std::string(domain_name(result.domain))) +
       " mean seconds per episode (all sizes)</text>\n";
  for (std::size_t i = 0; i < result.pooled.size(); ++i) {
    const auto& p = result.pooled[i];
    const double x = left + gap / 2 + (bar_w + gap) * static_cast<double>(i);
    double y = top + plot_h;
    for (int ph = 0; ph < 4; ++ph) {
      const double v = phase(p.mean_wall_times, ph);
      const double h = plot_h * v / max_total;
      y -= h;
      s += "<rect class=\"segment\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(bar_w) +
           "\" height=\"" + num(h) + "\" fill=\"" + kPhaseColors[ph] + "\" data-condition=\"" +
           std::string(condition_name(p.condition)) + "\" data-phase=\"" + kPhaseNames[ph] +
           "\" data-seconds=\"" + num(v) + "\"/>\n";
    }
    s += "<text x=\"" + num(x) + "\" y=\"" + num(top + plot_h + 16) + "\" font-size=\"10\">" +
         std::string(condition_name(p.condition)) + "</text>\n";
  }
  const double lx = width - 140;
  s += "<g class=\"legend\">\n";
  for (int ph = 0; ph < 4; ++ph) {
    const double ly = top + 18 * ph;
    s += "<rect x=\"" + num(lx) + "\" y=\"" + num(ly) + "\" width=\"12\" height=\"12\" fill=\"" +
         kPhaseColors[ph] + "\"/><text class=\"legend-item\" x=\"" + num(lx + 18) + "\" y=\"" +
         num(ly + 10) + "\" font-size=\"11\">" + kPhaseNames[ph] + "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

std::vector<fs::path> emit_report(const BatchResult& result, const fs::path& dir,
                                  const ReportFormats& formats) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw WorkspaceError("cannot create report directory " + dir.string());
  std::vector<fs::path> written;
  auto put = [&](const char* name, const std::string& body) {
    const fs::path p = dir / name;
    try {
      text::write_file(p.string(), body);
    } catch (const Error& e) {
      throw WorkspaceError(e.what());
    }
    written.push_back(p);
  };
  if (formats.csv) {
    put("summary.csv", summary_csv(result));
    put("runtime_pooled.csv", runtime_csv(result));
  }
  if (formats.json) put("batch_result.json", result.to_json().dump(2) + "\n");
  if (formats.svg) {
    put("success.svg", success_svg(result));
    put("runtime.svg", runtime_svg(result));
  }
  return written;
}

BatchResult load_batch_dir(const fs::path& dir) {
  DomainKind domain = DomainKind::BlocksWorld;
  std::vector<Condition> order;
  const fs::path spec_path = dir / "spec.json";
  if (fs::exists(spec_path)) {
    const BatchSpec spec = BatchSpec::from_json(nlohmann::json::parse(text::read_file(spec_path.string())));
    domain = spec.domain;
    order = spec.conditions;
  }
  return aggregate(domain, order, read_records(dir / "records.jsonl"));
}

}  // namespace htnagent
