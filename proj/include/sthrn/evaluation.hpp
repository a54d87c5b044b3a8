#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sthrn/skeleton.hpp"

namespace sthrn {

/// Evaluation horizons in milliseconds and the 1-based predicted-frame index
/// each one lands on at a given rate.
struct HorizonGrid {
  std::vector<int> ms;
  std::vector<std::size_t> frames;

  /// {80, 160, 320, 400, 560, 640, 720, 1000} ms.
  static HorizonGrid standard(double fps = 25.0);
  /// frames[i] = round(ms[i] * fps / 1000); must come out strictly increasing and >= 1.
  static HorizonGrid from_ms(std::vector<int> ms, double fps);
  std::size_t max_frame() const { return frames.empty() ? 0 : frames.back(); }
};

/// (1/K) * sum_z |a_z - b_z|.
double frame_mae(const LieVector& a, const LieVector& b);

/// MAE at every grid frame for one predicted sequence (frame n is pred[n-1]).
/// Throws SequenceTooShort when either sequence misses the last grid frame.
std::vector<double> mae(std::span<const LieVector> pred, std::span<const LieVector> target, const HorizonGrid& grid);

/// Same, but horizons past the end of either sequence are left empty.
std::vector<std::optional<double>> mae_available(std::span<const LieVector> pred, std::span<const LieVector> target,
                                                 const HorizonGrid& grid);

/// Averages per-sample MAE vectors over samples.
std::vector<double> average(const std::vector<std::vector<double>>& per_sample);

/// `horizon` copies of the last observed frame.
std::vector<LieVector> zero_velocity(std::span<const LieVector> observed, std::size_t horizon);

struct ReportRow {
  std::string activity;
  std::string method;
  std::vector<std::optional<double>> values;  // one per horizon; empty cells print as "_"

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct EvalReport {
  std::vector<int> horizons_ms;
  std::vector<ReportRow> rows;

  void add(std::string activity, std::string method, std::vector<std::optional<double>> values);
  void add(std::string activity, std::string method, const std::vector<double>& values);
  /// Lexicographic by (activity, method).
  void sort();

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// CSV `activity,method,h80,...`; rows sorted, values with 17 significant digits.
void write_report_csv(std::ostream& out, EvalReport report);
EvalReport read_report_csv(std::istream& in, const std::string& source = "<stream>");
/// Aligned plain-text table with three decimals.
std::string format_report_table(EvalReport report);

}  // namespace sthrn
