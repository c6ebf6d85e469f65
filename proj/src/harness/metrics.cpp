#include "drdqn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <sstream>
#include <stdexcept>

namespace drdqn {

std::string format_metrics_row(const MetricsRow& r) {
  return fmt::format("{},{},{},{},{},{},{:.3f}", r.step, r.episode, r.episode_return, r.loss, r.epsilon, r.mean_q,
                     r.wall_seconds);
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write metrics file '" + path.string() + "'");
  out_ << kMetricsHeader << '\n';
  out_.flush();
}

void MetricsWriter::write(const MetricsRow& row) {
  if (rows_ > 0 && row.step < last_step_) throw std::logic_error("metrics rows must not go back in step");
  out_ << format_metrics_row(row) << '\n';
  out_.flush();
  last_step_ = row.step;
  ++rows_;
}

std::size_t CsvTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  std::string available;
  for (const auto& c : columns) available += (available.empty() ? "" : ", ") + c;
  throw std::invalid_argument(fmt::format("unknown column '{}'; available columns: {}", name, available));
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv '" + path.string() + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw std::runtime_error("csv '" + path.string() + "' is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error(fmt::format("csv line {}: '{}' is not a number", line_no, cell));
      }
    }
    if (row.size() != table.columns.size()) {
      throw std::runtime_error(fmt::format("csv line {}: expected {} fields, got {}", line_no, table.columns.size(),
                                           row.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string polyline(const std::vector<std::pair<double, double>>& pts, std::string_view colour, double width) {
  std::string out = fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="{}" points=")", colour, width);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", pts[i].first, pts[i].second);
  }
  out += "\"/>\n";
  return out;
}

}  // namespace

std::string render_svg(const CsvTable& table, std::string_view column, const PlotOptions& opt) {
  const std::size_t yi = table.column_index(column);
  const std::size_t xi = table.column_index("step");
  if (table.rows.empty()) throw std::invalid_argument("csv has no data rows to plot");

  std::vector<double> xs, ys;
  for (const auto& r : table.rows) {
    xs.push_back(r[xi]);
    ys.push_back(r[yi]);
  }
  double x_lo = *std::min_element(xs.begin(), xs.end()), x_hi = *std::max_element(xs.begin(), xs.end());
  double y_lo = *std::min_element(ys.begin(), ys.end()), y_hi = *std::max_element(ys.begin(), ys.end());
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  const double pad = y_hi > y_lo ? 0.05 * (y_hi - y_lo) : (y_lo != 0.0 ? 0.05 * std::abs(y_lo) : 0.05);
  y_lo -= pad;
  y_hi += pad;

  const double left = 70, right = 20, top = 30, bottom = 50;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::vector<std::pair<double, double>> raw, smooth;
  double window_sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    raw.emplace_back(px(xs[i]), py(ys[i]));
    window_sum += ys[i];
    if (i >= opt.moving_average_window) window_sum -= ys[i - opt.moving_average_window];
    const auto n = std::min(i + 1, opt.moving_average_window);
    smooth.emplace_back(px(xs[i]), py(window_sum / static_cast<double>(n)));
  }

  std::string svg = fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">)"
      "\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      opt.width, opt.height);
  svg += fmt::format(R"(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>)"
                     "\n",
                     left, top + ph, left + pw);
  svg += fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>)"
                     "\n",
                     left, top, top + ph);
  for (int k = 0; k <= 4; ++k) {
    const double fx = x_lo + (x_hi - x_lo) * k / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * k / 4.0;
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="middle">{:.4g}</text>)"
                       "\n",
                       px(fx), top + ph + 18, fx);
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="end">{:.4g}</text>)"
                       "\n",
                       left - 6, py(fy) + 4, fy);
  }
  svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="13" text-anchor="middle">step</text>)"
                     "\n",
                     left + pw / 2, opt.height - 10);
  svg += fmt::format(
      R"svg(<text x="16" y="{:.2f}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2f})">{}</text>)svg"
      "\n",
      top + ph / 2, top + ph / 2, column);
  svg += polyline(raw, "#9ab8d8", 1.0);
  svg += polyline(smooth, "#c0392b", 2.0);
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::filesystem::path& csv_path, std::string_view column, const std::filesystem::path& out_svg,
               const PlotOptions& options) {
  const auto table = read_csv(csv_path);
  const std::string svg = render_svg(table, column, options);
  std::ofstream out(out_svg, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + out_svg.string() + "'");
  out << svg;
}

}  // namespace drdqn
