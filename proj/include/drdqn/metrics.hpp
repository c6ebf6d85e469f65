#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace drdqn {

inline constexpr std::string_view kMetricsHeader = "step,episode,episode_return,loss,epsilon,mean_q,wall_seconds";

/// One completed training episode.
struct MetricsRow {
  std::uint64_t step = 0;
  std::uint64_t episode = 0;
  double episode_return = 0.0;
  double loss = 0.0;
  double epsilon = 0.0;
  double mean_q = 0.0;
  double wall_seconds = 0.0;
};

std::string format_metrics_row(const MetricsRow& row);

/// Appends rows to metrics.csv, flushing after each so partial runs stay readable.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void write(const MetricsRow& row);
  std::size_t rows_written() const { return rows_; }

 private:
  std::ofstream out_;
  std::size_t rows_ = 0;
  std::uint64_t last_step_ = 0;
};

/// Parsed numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Throws std::invalid_argument listing the available columns.
  std::size_t column_index(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

struct PlotOptions {
  std::size_t moving_average_window = 100;
  double width = 800.0;
  double height = 450.0;
};

/// Standalone SVG line chart of `column` against `step`, with a trailing
/// moving-average overlay.
std::string render_svg(const CsvTable& table, std::string_view column, const PlotOptions& options = {});

void emit_plot(const std::filesystem::path& csv_path, std::string_view column, const std::filesystem::path& out_svg,
               const PlotOptions& options = {});

}  // namespace drdqn
