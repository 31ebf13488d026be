#include "actmeas/cli/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "actmeas/config.hpp"
#include "actmeas/errors.hpp"

namespace actmeas::cli {

namespace {

constexpr double kMargin = 60.0;
constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string svg_open(double width, double height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
         "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12) {
  return "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2, const char* color = "black") {
  return "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" + fmt(y2) +
         "\" stroke=\"" + color + "\"/>\n";
}

std::string rect(double x, double y, double w, double h, const char* fill) {
  return "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" fill=\"" + fill + "\"/>\n";
}

// Maps [lo, hi] onto a pixel range, padding a degenerate interval.
struct Scale {
  double lo, hi, p0, p1;
  Scale(double l, double h, double a, double b) : lo(l), hi(h), p0(a), p1(b) {
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
    }
  }
  double operator()(double v) const { return p0 + (v - lo) / (hi - lo) * (p1 - p0); }
};

std::string axes(const Scale& x, const Scale& y, const std::string& xlabel, const std::string& ylabel) {
  std::string out;
  out += line(x.p0, y.p0, x.p1, y.p0);
  out += line(x.p0, y.p0, x.p0, y.p1);
  for (int i = 0; i <= 4; ++i) {
    const double yv = y.lo + (y.hi - y.lo) * i / 4.0;
    out += text(x.p0 - 6, y(yv) + 4, fmt(yv), "end", 10);
    const double xv = x.lo + (x.hi - x.lo) * i / 4.0;
    out += text(x(xv), y.p0 + 16, fmt(xv), "middle", 10);
  }
  out += text((x.p0 + x.p1) / 2, y.p0 + 36, xlabel);
  out += "<text x=\"14\" y=\"" + fmt((y.p0 + y.p1) / 2) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         fmt((y.p0 + y.p1) / 2) + ")\">" + escape(ylabel) + "</text>\n";
  return out;
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : ""; }

}  // namespace

Plot trace_grid(const MeasurementTrace& trace) {
  require(!trace.empty(), "trace_grid: empty trace");
  std::size_t steps = 0;
  for (const auto& e : trace) steps = std::max(steps, e.size());
  const double cell = std::clamp(800.0 / std::max<std::size_t>(steps, 1), 2.0, 16.0);
  const double row = 16.0;
  const double width = 2 * kMargin + cell * steps;
  const double height = 2 * kMargin + row * trace.size();

  Plot plot;
  plot.table.header = {"episode", "step", "measured"};
  std::string& svg = plot.svg;
  svg = svg_open(width, height);
  for (std::size_t e = 0; e < trace.size(); ++e) {
    for (std::size_t t = 0; t < trace[e].size(); ++t) {
      svg += rect(kMargin + cell * t, kMargin + row * e, cell, row, trace[e][t] ? kMeasuredColor : kUnmeasuredColor);
      plot.table.rows.push_back({std::to_string(e), std::to_string(t), trace[e][t] ? "1" : "0"});
    }
  }
  svg += text(width / 2, height - kMargin / 3, "time step");
  svg += text(kMargin / 2, kMargin - 10, "episode");
  for (std::size_t e = 0; e < trace.size(); ++e)
    svg += text(kMargin - 6, kMargin + row * e + row * 0.75, std::to_string(e), "end", 10);
  svg += rect(kMargin, 14, 12, 12, kMeasuredColor) + text(kMargin + 16, 24, "measured", "start");
  svg += rect(kMargin + 100, 14, 12, 12, kUnmeasuredColor) + text(kMargin + 116, 24, "not measured", "start");
  svg += "</svg>\n";
  return plot;
}

Plot learning_curve(const std::vector<CsvTable>& metrics) {
  // env_steps -> one value per trial (keyed by source table and trial id)
  std::map<long, std::map<std::string, double>> by_step;
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const CsvTable& t = metrics[m];
    const std::size_t trial_col = t.column("trial");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const long step = std::lround(t.number(r, "env_steps"));
      const std::string key = std::to_string(m) + "/" + t.rows[r][trial_col];
      by_step[step][key] = t.number(r, "eval_median_costed_return");
    }
  }
  if (by_step.empty()) throw DataError("learning-curve: no evaluation rows");

  Plot plot;
  plot.table.header = {"env_steps", "trials", "median_costed_return", "min_costed_return", "max_costed_return"};
  std::vector<double> xs, med, lo, hi;
  for (const auto& [step, values] : by_step) {
    std::vector<double> v;
    for (const auto& kv : values) v.push_back(kv.second);
    xs.push_back(static_cast<double>(step));
    med.push_back(median(v));
    lo.push_back(*std::min_element(v.begin(), v.end()));
    hi.push_back(*std::max_element(v.begin(), v.end()));
    plot.table.rows.push_back({std::to_string(step), std::to_string(v.size()), num(med.back()), num(lo.back()),
                               num(hi.back())});
  }

  const double width = 720, height = 420;
  const Scale x(0.0, xs.back(), kMargin, width - kMargin / 2);
  const Scale y(*std::min_element(lo.begin(), lo.end()), *std::max_element(hi.begin(), hi.end()), height - kMargin,
                kMargin / 2);
  std::string& svg = plot.svg;
  svg = svg_open(width, height);
  std::string band;
  for (std::size_t i = 0; i < xs.size(); ++i) band += fmt(x(xs[i])) + "," + fmt(y(hi[i])) + " ";
  for (std::size_t i = xs.size(); i-- > 0;) band += fmt(x(xs[i])) + "," + fmt(y(lo[i])) + " ";
  svg += "<polygon points=\"" + band + "\" fill=\"" + kUnmeasuredColor + "\" fill-opacity=\"0.25\"/>\n";
  std::string curve;
  for (std::size_t i = 0; i < xs.size(); ++i) curve += fmt(x(xs[i])) + "," + fmt(y(med[i])) + " ";
  svg += "<polyline points=\"" + curve + "\" fill=\"none\" stroke=\"" + kUnmeasuredColor + "\" stroke-width=\"2\"/>\n";
  svg += axes(x, y, "environment steps", "median costed return");
  svg += "</svg>\n";
  return plot;
}

Plot cost_bars(const std::vector<CsvTable>& summaries) {
  struct Bar {
    bool vanilla;
    double cost;
    std::string label;
    double value;  // NaN when every trial failed
  };
  std::map<std::string, std::vector<Bar>> groups;
  for (const CsvTable& t : summaries) {
    const std::size_t agent_col = t.column("agent");
    const std::size_t best_col = t.column("median_best_costed");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const bool vanilla = t.number(r, "vanilla") != 0.0;
      const double cost = t.number(r, "cost");
      const double value = t.rows[r][best_col].empty() ? std::nan("") : t.number(r, "median_best_costed");
      groups[t.rows[r][agent_col]].push_back({vanilla, cost, vanilla ? "vanilla" : format_double(cost), value});
    }
  }
  if (groups.empty()) throw DataError("cost-bars: no summary rows");

  Plot plot;
  plot.table.header = {"agent", "cost", "vanilla", "median_best_costed"};
  std::vector<std::string> labels;
  double vmin = 0.0, vmax = 0.0;
  std::size_t bars = 0;
  for (auto& [agent, list] : groups) {
    std::sort(list.begin(), list.end(), [](const Bar& a, const Bar& b) {
      return a.vanilla != b.vanilla ? a.vanilla : a.cost < b.cost;
    });
    for (const Bar& b : list) {
      plot.table.rows.push_back({agent, format_double(b.cost), b.vanilla ? "1" : "0", num(b.value)});
      if (std::find(labels.begin(), labels.end(), b.label) == labels.end()) labels.push_back(b.label);
      if (std::isfinite(b.value)) {
        vmin = std::min(vmin, b.value);
        vmax = std::max(vmax, b.value);
      }
      ++bars;
    }
  }

  const double bar_w = 28, gap = 36;
  const double width = 2 * kMargin + bars * bar_w + groups.size() * gap + 160;
  const double height = 420;
  const double plot_right = width - kMargin - 140;
  const Scale y(vmin, vmax, height - kMargin, kMargin / 2);
  std::string& svg = plot.svg;
  svg = svg_open(width, height);
  svg += line(kMargin, y(0.0), plot_right, y(0.0));
  svg += line(kMargin, y.p0, kMargin, y.p1);
  for (int i = 0; i <= 4; ++i) {
    const double v = y.lo + (y.hi - y.lo) * i / 4.0;
    svg += text(kMargin - 6, y(v) + 4, fmt(v), "end", 10);
  }
  double cursor = kMargin + gap / 2;
  for (const auto& [agent, list] : groups) {
    const double start = cursor;
    for (const Bar& b : list) {
      const auto color_index = static_cast<std::size_t>(
          std::find(labels.begin(), labels.end(), b.label) - labels.begin());
      const char* color = kPalette[color_index % std::size(kPalette)];
      if (std::isfinite(b.value)) {
        const double top = std::min(y(b.value), y(0.0));
        svg += rect(cursor, top, bar_w - 4, std::abs(y(b.value) - y(0.0)), color);
      }
      cursor += bar_w;
    }
    svg += text((start + cursor) / 2, height - kMargin + 18, agent);
    cursor += gap;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double ly = kMargin / 2 + 18 * i;
    svg += rect(plot_right + 20, ly, 12, 12, kPalette[i % std::size(kPalette)]);
    svg += text(plot_right + 38, ly + 10, labels[i] == "vanilla" ? "vanilla" : "cost " + labels[i], "start");
  }
  svg += text(14, kMargin / 2 - 8, "median best costed return", "start");
  svg += "</svg>\n";
  return plot;
}

void write_table_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  auto write_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  write_row(table.header);
  for (const auto& r : table.rows) write_row(r);
}

}  // namespace actmeas::cli
