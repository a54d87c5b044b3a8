#include "sthrn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "sthrn/errors.hpp"
#include "text_util.hpp"

namespace sthrn {

HorizonGrid HorizonGrid::standard(double fps) { return from_ms({80, 160, 320, 400, 560, 640, 720, 1000}, fps); }

HorizonGrid HorizonGrid::from_ms(std::vector<int> ms, double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw UnsupportedRate("frame rate must be positive");
  HorizonGrid g;
  g.ms = std::move(ms);
  for (int m : g.ms) {
    const double f = std::round(static_cast<double>(m) * fps / 1000.0);
    if (f < 1.0) throw UnsupportedRate(std::to_string(m) + " ms is below one frame at this rate");
    const auto frame = static_cast<std::size_t>(f);
    if (!g.frames.empty() && frame <= g.frames.back()) {
      throw UnsupportedRate("horizon grid is not strictly increasing at this rate");
    }
    g.frames.push_back(frame);
  }
  return g;
}

double frame_mae(const LieVector& a, const LieVector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("frames have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                            " entries");
  }
  if (a.empty()) throw EmptyInput("frame with zero entries");
  double total = 0.0;
  for (std::size_t z = 0; z < a.size(); ++z) total += (a[z] - b[z]).norm();
  return total / static_cast<double>(a.size());
}

std::vector<std::optional<double>> mae_available(std::span<const LieVector> pred, std::span<const LieVector> target,
                                                 const HorizonGrid& grid) {
  std::vector<std::optional<double>> out;
  for (std::size_t n : grid.frames) {
    if (n <= pred.size() && n <= target.size()) {
      out.emplace_back(frame_mae(pred[n - 1], target[n - 1]));
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

std::vector<double> mae(std::span<const LieVector> pred, std::span<const LieVector> target, const HorizonGrid& grid) {
  const std::size_t need = grid.max_frame();
  if (pred.size() < need || target.size() < need) {
    throw SequenceTooShort("MAE grid needs " + std::to_string(need) + " frames, got " + std::to_string(pred.size()) +
                           " predicted and " + std::to_string(target.size()) + " target");
  }
  std::vector<double> out;
  for (const auto& v : mae_available(pred, target, grid)) out.push_back(*v);
  return out;
}

std::vector<double> average(const std::vector<std::vector<double>>& per_sample) {
  if (per_sample.empty()) throw EmptyInput("average over zero samples");
  std::vector<double> out(per_sample.front().size(), 0.0);
  for (const auto& s : per_sample) {
    if (s.size() != out.size()) throw DimensionMismatch("samples have different horizon counts");
    for (std::size_t i = 0; i < s.size(); ++i) out[i] += s[i];
  }
  for (double& v : out) v /= static_cast<double>(per_sample.size());
  return out;
}

std::vector<LieVector> zero_velocity(std::span<const LieVector> observed, std::size_t horizon) {
  if (observed.empty()) throw EmptyInput("zero-velocity baseline needs an observed frame");
  return std::vector<LieVector>(horizon, observed.back());
}

void EvalReport::add(std::string activity, std::string method, std::vector<std::optional<double>> values) {
  if (values.size() != horizons_ms.size()) {
    throw DimensionMismatch("report row has " + std::to_string(values.size()) + " values for " +
                            std::to_string(horizons_ms.size()) + " horizons");
  }
  rows.push_back({std::move(activity), std::move(method), std::move(values)});
}

void EvalReport::add(std::string activity, std::string method, const std::vector<double>& values) {
  add(std::move(activity), std::move(method), std::vector<std::optional<double>>(values.begin(), values.end()));
}

void EvalReport::sort() {
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return a.activity != b.activity ? a.activity < b.activity : a.method < b.method;
  });
}

namespace {

void check_label(const std::string& s) {
  if (s.find_first_of(",\n\r") != std::string::npos) throw ValidationError("report label contains ',' or newline: " + s);
}

}  // namespace

void write_report_csv(std::ostream& out, EvalReport report) {
  report.sort();
  out << "activity,method";
  for (int m : report.horizons_ms) out << ",h" << m;
  out << '\n';
  for (const auto& row : report.rows) {
    check_label(row.activity);
    check_label(row.method);
    out << row.activity << ',' << row.method;
    for (const auto& v : row.values) out << ',' << (v ? detail::format_double(*v) : std::string("_"));
    out << '\n';
  }
}

EvalReport read_report_csv(std::istream& in, const std::string& source) {
  EvalReport report;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty report");
  ++lineno;
  const auto header = detail::split(detail::trim(line), ',');
  if (header.size() < 2 || header[0] != "activity" || header[1] != "method") {
    throw ParseError(source, lineno, "header must start with activity,method");
  }
  for (std::size_t i = 2; i < header.size(); ++i) {
    double ms = 0.0;
    if (header[i].size() < 2 || header[i][0] != 'h' || !detail::parse_double(header[i].substr(1), ms)) {
      throw ParseError(source, lineno, "bad horizon column '" + header[i] + "'");
    }
    report.horizons_ms.push_back(static_cast<int>(ms));
  }
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != header.size()) throw ParseError(source, lineno, "wrong number of columns");
    std::vector<std::optional<double>> values;
    for (std::size_t i = 2; i < cells.size(); ++i) {
      if (cells[i] == "_") {
        values.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      if (!detail::parse_double(cells[i], v)) throw ParseError(source, lineno, "bad value '" + cells[i] + "'");
      values.emplace_back(v);
    }
    report.add(cells[0], cells[1], std::move(values));
  }
  return report;
}

std::string format_report_table(EvalReport report) {
  report.sort();
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"activity", "method"};
  for (int m : report.horizons_ms) head.push_back(std::to_string(m) + "ms");
  cells.push_back(head);
  for (const auto& row : report.rows) {
    std::vector<std::string> r{row.activity, row.method};
    for (const auto& v : row.values) {
      if (v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f", *v);
        r.emplace_back(buf);
      } else {
        r.emplace_back("_");
      }
    }
    cells.push_back(std::move(r));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& r : cells) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (const auto& r : cells) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i > 0) out << "  ";
      if (i < 2) {
        out << r[i] << std::string(width[i] - r[i].size(), ' ');
      } else {
        out << std::string(width[i] - r[i].size(), ' ') << r[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace sthrn
