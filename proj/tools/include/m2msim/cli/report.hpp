#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include <m2msim/engine.hpp>

namespace m2msim::cli {

// Floats are written with 9 significant digits.
void write_periods_csv(std::ostream& out, const RunSummary& run);
void write_slots_csv(std::ostream& out, const RunSummary& run);
// axis_value is left empty for single runs.
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, int run_id, const RunSummary& run, const double* axis_value = nullptr);
// Per axis value: mean and standard error over seeds.
void write_sweep_plot_csv(std::ostream& out, std::span<const SweepRow> rows);

struct SweepPoint {
  double axis_value;
  double mean;
  double stderr_;
  int samples;
};
std::vector<SweepPoint> aggregate(std::span<const SweepRow> rows);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace m2msim::cli
