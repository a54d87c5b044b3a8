#include "sthrn/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "sthrn/errors.hpp"
#include "sthrn/random.hpp"
#include "text_util.hpp"

namespace sthrn {

std::string_view to_string(ChainRole role) {
  switch (role) {
    case ChainRole::spine:
      return "spine";
    case ChainRole::arm:
      return "arm";
    case ChainRole::leg:
      return "leg";
  }
  return "spine";
}

ChainRole parse_chain_role(std::string_view text) {
  if (text == "spine") return ChainRole::spine;
  if (text == "arm") return ChainRole::arm;
  if (text == "leg") return ChainRole::leg;
  throw ValidationError("unknown chain role '" + std::string(text) + "' (expected spine, arm or leg)");
}

std::size_t SkeletonTopology::bone_count() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.bone_count();
  return n;
}

std::size_t SkeletonTopology::lie_size() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.lie_size();
  return n;
}

std::size_t SkeletonTopology::first_bone(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < c; ++i) n += chains[i].bone_count();
  return n;
}

std::size_t SkeletonTopology::first_entry(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < c; ++i) n += chains[i].lie_size();
  return n;
}

double SkeletonTopology::entry_length(std::size_t entry) const {
  std::size_t base = 0;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const std::size_t k = chains[c].lie_size();
    if (entry < base + k) {
      // Entry m of a chain rotates bone m into bone m + 1.
      return lengths.at(first_bone(c) + (entry - base) + 1);
    }
    base += k;
  }
  throw DimensionMismatch("Lie entry " + std::to_string(entry) + " out of range");
}

std::vector<double> SkeletonTopology::entry_lengths() const {
  std::vector<double> out;
  out.reserve(lie_size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const std::size_t b0 = first_bone(c);
    for (std::size_t m = 0; m < chains[c].lie_size(); ++m) out.push_back(lengths.at(b0 + m + 1));
  }
  return out;
}

std::size_t SkeletonTopology::joint_index(std::string_view id) const {
  const auto it = std::find(joints.begin(), joints.end(), id);
  if (it == joints.end()) {
    throw ValidationError("unknown joint '" + std::string(id) + "'");
  }
  return static_cast<std::size_t>(it - joints.begin());
}

void SkeletonTopology::validate() const {
  if (joints.empty()) throw ValidationError("topology has no joints");
  if (chains.empty()) throw ValidationError("topology has no chains");
  {
    std::vector<std::string> sorted = joints;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ValidationError("duplicate joint id");
    }
  }
  std::vector<bool> placed(joints.size(), false);
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto& chain = chains[c];
    if (chain.joints.size() < 2) {
      throw ValidationError("chain " + std::to_string(c + 1) + " has fewer than two joints");
    }
    for (std::size_t j : chain.joints) {
      if (j >= joints.size()) throw ValidationError("chain " + std::to_string(c + 1) + " references unknown joint");
    }
    const std::size_t attach = chain.joints.front();
    if (c == 0) {
      placed[attach] = true;
    } else if (!placed[attach]) {
      throw ValidationError("chain " + std::to_string(c + 1) + " is disconnected: attachment joint '" +
                            joints[attach] + "' does not appear in an earlier chain");
    }
    for (std::size_t k = 1; k < chain.joints.size(); ++k) {
      const std::size_t j = chain.joints[k];
      if (placed[j]) {
        throw ValidationError("joint '" + joints[j] + "' is reached by more than one bone");
      }
      placed[j] = true;
    }
  }
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (!placed[j]) throw ValidationError("joint '" + joints[j] + "' is not part of any chain");
  }
  if (lengths.size() != bone_count()) {
    throw ValidationError("expected " + std::to_string(bone_count()) + " bone lengths, got " +
                          std::to_string(lengths.size()));
  }
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    if (!std::isfinite(lengths[b]) || lengths[b] <= 0.0) {
      throw ValidationError("bone " + std::to_string(b) + " has non-positive length");
    }
  }
}

ChainLayout ChainLayout::from(const SkeletonTopology& topo) {
  ChainLayout out;
  for (const auto& chain : topo.chains) {
    out.roles.push_back(chain.role);
    out.sizes.push_back(chain.lie_size());
  }
  return out;
}

ChainLayout ChainLayout::parse(std::string_view text) {
  ChainLayout out;
  for (const auto& item : detail::split(text, ',')) {
    const auto colon = item.find(':');
    double k = 0.0;
    if (colon == std::string::npos || !detail::parse_double(detail::trim(item.substr(colon + 1)), k) || k < 0.0 ||
        k != static_cast<double>(static_cast<std::size_t>(k))) {
      throw ValidationError("bad chain layout entry '" + item + "' (expected role:count)");
    }
    out.roles.push_back(parse_chain_role(detail::trim(item.substr(0, colon))));
    out.sizes.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

std::string ChainLayout::str() const {
  std::string out;
  for (std::size_t c = 0; c < roles.size(); ++c) {
    if (c > 0) out += ',';
    out += std::string(to_string(roles[c])) + ':' + std::to_string(sizes[c]);
  }
  return out;
}

std::size_t ChainLayout::lie_size() const {
  std::size_t n = 0;
  for (std::size_t k : sizes) n += k;
  return n;
}

std::size_t ChainLayout::first_entry(std::size_t c) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < c; ++i) n += sizes[i];
  return n;
}

SkeletonTopology parse_topology(std::istream& in, const std::string& source) {
  enum class Section { none, joints, chains, lengths };
  SkeletonTopology topo;
  std::vector<std::pair<std::string, std::vector<std::string>>> chain_lines;
  std::vector<std::size_t> chain_line_numbers;
  struct LengthLine {
    std::string from, to;
    double value;
    std::size_t line;
  };
  std::vector<LengthLine> length_lines;

  Section section = Section::none;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[joints]") section = Section::joints;
      else if (line == "[chains]") section = Section::chains;
      else if (line == "[lengths]") section = Section::lengths;
      else throw ParseError(source, line_no, "unknown section " + line);
      continue;
    }
    const auto tokens = detail::split_ws(line);
    switch (section) {
      case Section::none:
        throw ParseError(source, line_no, "content before the first section header");
      case Section::joints:
        topo.joints.insert(topo.joints.end(), tokens.begin(), tokens.end());
        break;
      case Section::chains: {
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
          throw ParseError(source, line_no, "chain line must look like '<role>: <joint> <joint> ...'");
        }
        const std::string role = detail::trim(line.substr(0, colon));
        chain_lines.emplace_back(role, detail::split_ws(line.substr(colon + 1)));
        chain_line_numbers.push_back(line_no);
        break;
      }
      case Section::lengths: {
        if (tokens.size() != 3) {
          throw ParseError(source, line_no, "length line must be '<from> <to> <length>'");
        }
        double value = 0.0;
        if (!detail::parse_double(tokens[2], value)) {
          throw ParseError(source, line_no, "bad length value '" + tokens[2] + "'");
        }
        length_lines.push_back({tokens[0], tokens[1], value, line_no});
        break;
      }
    }
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < topo.joints.size(); ++j) index.emplace(topo.joints[j], j);

  for (std::size_t c = 0; c < chain_lines.size(); ++c) {
    Chain chain;
    try {
      chain.role = parse_chain_role(chain_lines[c].first);
    } catch (const ValidationError& e) {
      throw ParseError(source, chain_line_numbers[c], e.what());
    }
    for (const auto& id : chain_lines[c].second) {
      const auto it = index.find(id);
      if (it == index.end()) throw ParseError(source, chain_line_numbers[c], "unknown joint '" + id + "'");
      chain.joints.push_back(it->second);
    }
    topo.chains.push_back(std::move(chain));
  }

  // Bones keyed by (from, to) joint index.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> bone_of;
  {
    std::size_t b = 0;
    for (const auto& chain : topo.chains) {
      for (std::size_t k = 0; k + 1 < chain.joints.size(); ++k) bone_of[{chain.joints[k], chain.joints[k + 1]}] = b++;
    }
    topo.lengths.assign(b, 0.0);
  }
  std::vector<bool> seen(topo.lengths.size(), false);
  for (const auto& l : length_lines) {
    const auto from = index.find(l.from);
    const auto to = index.find(l.to);
    if (from == index.end() || to == index.end()) {
      throw ParseError(source, l.line, "length refers to unknown joint");
    }
    const auto bone = bone_of.find({from->second, to->second});
    if (bone == bone_of.end()) {
      throw ParseError(source, l.line, "no bone " + l.from + " -> " + l.to + " in any chain");
    }
    if (seen[bone->second]) throw ParseError(source, l.line, "duplicate length for " + l.from + " -> " + l.to);
    seen[bone->second] = true;
    topo.lengths[bone->second] = l.value;
  }
  for (std::size_t b = 0; b < seen.size(); ++b) {
    if (!seen[b]) throw ParseError(source, 0, "missing length for bone " + std::to_string(b));
  }

  topo.validate();
  return topo;
}

SkeletonTopology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_topology(in, path.string());
}

void write_topology(std::ostream& out, const SkeletonTopology& topo) {
  out << "[joints]\n";
  for (const auto& j : topo.joints) out << j << '\n';
  out << "\n[chains]\n";
  for (const auto& chain : topo.chains) {
    out << to_string(chain.role) << ':';
    for (std::size_t j : chain.joints) out << ' ' << topo.joints[j];
    out << '\n';
  }
  out << "\n[lengths]\n";
  std::size_t b = 0;
  for (const auto& chain : topo.chains) {
    for (std::size_t k = 0; k + 1 < chain.joints.size(); ++k, ++b) {
      out << topo.joints[chain.joints[k]] << ' ' << topo.joints[chain.joints[k + 1]] << ' '
          << detail::format_double(topo.lengths[b]) << '\n';
    }
  }
}

void save_topology(const std::filesystem::path& path, const SkeletonTopology& topo) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_topology(out, topo);
}

SkeletonTopology normalize_lengths(const std::vector<MotionSequence>& seqs, const SkeletonTopology& topo) {
  const std::size_t bones = topo.bone_count();
  std::vector<std::vector<double>> samples(bones);
  for (const auto& seq : seqs) {
    if (seq.kind != FrameKind::joints) throw ValidationError("normalize_lengths needs joint-position sequences");
    for (const auto& frame : seq.frames) {
      if (frame.size() != topo.joints.size()) {
        throw DimensionMismatch("frame has " + std::to_string(frame.size()) + " joints, topology has " +
                                std::to_string(topo.joints.size()));
      }
      std::size_t b = 0;
      for (const auto& chain : topo.chains) {
        for (std::size_t k = 0; k + 1 < chain.joints.size(); ++k, ++b) {
          samples[b].push_back((frame[chain.joints[k + 1]] - frame[chain.joints[k]]).norm());
        }
      }
    }
  }
  if (bones == 0 || samples.front().empty()) throw EmptyInput("no frames to normalize bone lengths over");

  SkeletonTopology out = topo;
  for (std::size_t b = 0; b < bones; ++b) {
    // Sorting first makes the sum independent of sequence order.
    auto& v = samples[b];
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    out.lengths[b] = sum / static_cast<double>(v.size());
  }
  return out;
}

MotionSequence resample_fps(const MotionSequence& seq, double target_fps) {
  if (!(target_fps > 0.0)) throw UnsupportedRate("target fps must be positive");
  if (seq.fps < target_fps) {
    throw UnsupportedRate("cannot resample " + detail::format_double(seq.fps) + " fps up to " +
                          detail::format_double(target_fps) + " fps");
  }
  const auto stride = static_cast<std::size_t>(std::llround(seq.fps / target_fps));
  MotionSequence out = seq;
  out.frames.clear();
  for (std::size_t i = 0; i < seq.frames.size(); i += stride) out.frames.push_back(seq.frames[i]);
  out.fps = seq.fps / static_cast<double>(stride);
  return out;
}

SampleWindow window_at(const MotionSequence& seq, std::size_t offset, std::size_t observed, std::size_t horizon) {
  if (observed < 2) throw ValidationError("a window needs at least two observed frames");
  if (offset + observed + horizon > seq.frames.size()) {
    throw SequenceTooShort("window [" + std::to_string(offset) + ", " + std::to_string(offset + observed + horizon) +
                           ") exceeds sequence of " + std::to_string(seq.frames.size()) + " frames");
  }
  SampleWindow w;
  w.offset = offset;
  const auto begin = seq.frames.begin() + static_cast<std::ptrdiff_t>(offset);
  w.observed.assign(begin, begin + static_cast<std::ptrdiff_t>(observed));
  w.target.assign(begin + static_cast<std::ptrdiff_t>(observed),
                  begin + static_cast<std::ptrdiff_t>(observed + horizon));
  return w;
}

std::vector<SampleWindow> sample_windows(const MotionSequence& seq, std::size_t observed, std::size_t horizon,
                                         std::size_t count, std::uint64_t seed) {
  if (seq.frames.size() < observed + horizon) {
    throw SequenceTooShort("sequence has " + std::to_string(seq.frames.size()) + " frames, windows need " +
                           std::to_string(observed + horizon));
  }
  const std::size_t last = seq.frames.size() - observed - horizon;
  Rng rng(seed);
  std::vector<SampleWindow> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    out.push_back(window_at(seq, rng.uniform_int(0, last), observed, horizon));
  }
  return out;
}

}  // namespace sthrn
