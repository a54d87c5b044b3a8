#include <fstream>
#include <optional>
#include <sstream>

#include "sthrn/errors.hpp"
#include "sthrn/skeleton.hpp"
#include "text_util.hpp"

namespace sthrn {

namespace {

struct Header {
  double fps = 0.0;
  bool has_k = false;
  std::size_t k = 0;
};

Header parse_header(const std::string& line, const std::string& source, std::size_t line_no) {
  Header h;
  bool has_fps = false;
  for (const auto& field : detail::split(line, ',')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "header field '" + field + "' is not key=value");
    const std::string key = detail::trim(field.substr(0, eq));
    const std::string value = detail::trim(field.substr(eq + 1));
    if (key == "fps") {
      if (!detail::parse_double(value, h.fps) || !(h.fps > 0.0)) {
        throw ParseError(source, line_no, "fps must be a positive number");
      }
      has_fps = true;
    } else if (key == "k") {
      double k = 0.0;
      if (!detail::parse_double(value, k) || k < 0.0 || k != static_cast<double>(static_cast<std::size_t>(k))) {
        throw ParseError(source, line_no, "k must be a non-negative integer");
      }
      h.k = static_cast<std::size_t>(k);
      h.has_k = true;
    } else {
      throw ParseError(source, line_no, "unknown header field '" + key + "'");
    }
  }
  if (!has_fps) throw ParseError(source, line_no, "header is missing fps=<n>");
  return h;
}

}  // namespace

MotionFormat parse_motion_format(std::string_view text) {
  if (text == "csv-joints") return MotionFormat::csv_joints;
  if (text == "csv-lie") return MotionFormat::csv_lie;
  throw ValidationError("unknown motion format '" + std::string(text) + "' (expected csv-joints or csv-lie)");
}

MotionFormat detect_motion_format(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    return parse_header(line, path.string(), line_no).has_k ? MotionFormat::csv_lie : MotionFormat::csv_joints;
  }
  throw ParseError(path.string(), 0, "missing header");
}

MotionSequence read_motion(std::istream& in, MotionFormat format, const std::string& source) {
  MotionSequence seq;
  seq.kind = format == MotionFormat::csv_lie ? FrameKind::lie : FrameKind::joints;
  std::optional<Header> header;
  std::size_t width = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (!header) {
      if (line.front() == '#') {
        const std::string body = detail::trim(line.substr(1));
        if (body.rfind("subject=", 0) == 0) seq.subject = body.substr(8);
        else if (body.rfind("activity=", 0) == 0) seq.activity = body.substr(9);
        continue;
      }
      header = parse_header(line, source, line_no);
      if (format == MotionFormat::csv_lie && !header->has_k) {
        throw ParseError(source, line_no, "csv-lie header must be fps=<n>,k=<K>");
      }
      if (format == MotionFormat::csv_joints && header->has_k) {
        throw ParseError(source, line_no, "file is csv-lie (header has k=), expected csv-joints");
      }
      seq.fps = header->fps;
      width = header->has_k ? 3 * header->k : 0;
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (width == 0) {
      if (fields.size() % 3 != 0) {
        throw ParseError(source, line_no, "row has " + std::to_string(fields.size()) + " values, not a multiple of 3");
      }
      width = fields.size();
    }
    if (fields.size() != width) {
      throw ParseError(source, line_no,
                       "row has " + std::to_string(fields.size()) + " values, expected " + std::to_string(width));
    }
    Frame frame(width / 3);
    for (std::size_t n = 0; n < fields.size(); ++n) {
      double v = 0.0;
      if (!detail::parse_double(detail::trim(fields[n]), v)) {
        throw ParseError(source, line_no, "bad number '" + fields[n] + "' in column " + std::to_string(n + 1));
      }
      frame[n / 3][static_cast<Eigen::Index>(n % 3)] = v;
    }
    seq.frames.push_back(std::move(frame));
  }
  if (!header) throw ParseError(source, 0, "missing header");
  return seq;
}

MotionSequence load_motion(const std::filesystem::path& path, MotionFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_motion(in, format, path.string());
}

MotionSequence load_motion(const std::filesystem::path& path, MotionFormat format, const SkeletonTopology& topo) {
  MotionSequence seq = load_motion(path, format);
  const std::size_t expected = format == MotionFormat::csv_lie ? topo.lie_size() : topo.joints.size();
  if (!seq.frames.empty() && seq.width() != expected) {
    throw DimensionMismatch(path.string() + ": frames have " + std::to_string(seq.width()) + " entries, topology needs " +
                            std::to_string(expected));
  }
  return seq;
}

void write_motion(std::ostream& out, const MotionSequence& seq) {
  if (!seq.subject.empty()) out << "# subject=" << seq.subject << '\n';
  if (!seq.activity.empty()) out << "# activity=" << seq.activity << '\n';
  out << "fps=" << detail::format_double(seq.fps);
  if (seq.kind == FrameKind::lie) out << ",k=" << seq.width();
  out << '\n';
  for (const auto& frame : seq.frames) {
    bool first = true;
    for (const auto& v : frame) {
      for (Eigen::Index d = 0; d < 3; ++d) {
        if (!first) out << ',';
        out << detail::format_double(v[d]);
        first = false;
      }
    }
    out << '\n';
  }
}

void save_motion(const std::filesystem::path& path, const MotionSequence& seq) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_motion(out, seq);
}

}  // namespace sthrn
