#include "sthrn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "sthrn/errors.hpp"
#include "text_util.hpp"

namespace sthrn {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'H', 'R', 'N', 'C', 'K', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 4);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(std::istream& in, const std::string& source) : in_(in), source_(source) {}

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated file");
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::uint64_t limit) {
    const std::uint64_t n = u64();
    if (n > limit) fail("implausible string length");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, 0, what); }

 private:
  std::istream& in_;
  const std::string& source_;
};

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string lengths_text(const std::vector<double>& lengths) {
  std::string out;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (i > 0) out += ',';
    out += detail::format_double(lengths[i]);
  }
  return out;
}

std::string config_text(const Checkpoint& ck) {
  std::ostringstream out;
  out << "hidden=" << ck.model.encoder.hidden << '\n'
      << "layers=" << ck.model.encoder.layers << '\n'
      << "disable_global_temporal=" << bool_text(ck.model.encoder.disable_global_temporal) << '\n'
      << "disable_global_spatial=" << bool_text(ck.model.encoder.disable_global_spatial) << '\n'
      << "decoder=" << to_string(ck.model.decoder) << '\n'
      << "chains=" << ck.layout.str() << '\n'
      << "entry_lengths=" << lengths_text(ck.entry_lengths) << '\n';
  for (const auto& [k, v] : ck.settings) out << "setting." << k << '=' << v << '\n';
  return out.str();
}

std::size_t parse_count(Reader& r, const std::string& text) {
  double v = 0.0;
  if (!detail::parse_double(text, v) || v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    r.fail("bad integer '" + text + "' in config block");
  }
  return static_cast<std::size_t>(v);
}

bool parse_bool(Reader& r, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  r.fail("bad boolean '" + text + "' in config block");
}

void apply_config(Reader& r, const std::string& text, Checkpoint& ck) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) r.fail("config line without '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key.rfind("setting.", 0) == 0) {
      ck.settings.emplace_back(key.substr(8), value);
    } else {
      kv[key] = value;
    }
  }
  const auto need = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) r.fail(std::string("config block lacks '") + key + "'");
    return it->second;
  };
  try {
    ck.model.encoder.hidden = parse_count(r, need("hidden"));
    ck.model.encoder.layers = parse_count(r, need("layers"));
    ck.model.encoder.disable_global_temporal = parse_bool(r, need("disable_global_temporal"));
    ck.model.encoder.disable_global_spatial = parse_bool(r, need("disable_global_spatial"));
    ck.model.decoder = parse_decoder_kind(need("decoder"));
    ck.layout = ChainLayout::parse(need("chains"));
    ck.entry_lengths.clear();
    const std::string& lengths = need("entry_lengths");
    if (!lengths.empty()) {
      for (const auto& item : detail::split(lengths, ',')) {
        double v = 0.0;
        if (!detail::parse_double(item, v)) r.fail("bad entry length '" + item + "'");
        ck.entry_lengths.push_back(v);
      }
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    r.fail(e.what());
  }
}

}  // namespace

Model Checkpoint::build() const {
  Model m(model, layout);
  ParamStore& p = m.params();
  if (p.size() != params.size()) {
    throw ValidationError("checkpoint holds " + std::to_string(params.size()) + " tensors, architecture needs " +
                          std::to_string(p.size()));
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.name(i) != params.name(i) || !(p[i].shape() == params[i].shape())) {
      throw ValidationError("checkpoint tensor '" + params.name(i) + "' " + params[i].shape().str() +
                            " does not match '" + p.name(i) + "' " + p[i].shape().str());
    }
    p[i] = params[i];
  }
  return m;
}

Checkpoint make_checkpoint(const Model& model, std::vector<double> entry_lengths) {
  Checkpoint ck;
  ck.model = model.config();
  ck.layout = model.layout();
  ck.entry_lengths = std::move(entry_lengths);
  ck.params = model.params();
  ck.adam = AdamState::zeros_for(ck.params);
  return ck;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  const std::string cfg = config_text(ck);
  put_u64(out, cfg.size());
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  put_u64(out, ck.iteration);
  put_u64(out, ck.params.size());
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    const auto& name = ck.params.name(i);
    const auto& t = ck.params[i];
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.shape().rank()));
    put_u64(out, t.shape().rank() >= 1 ? t.shape()[0] : 1);
    put_u64(out, t.shape().rank() == 2 ? t.shape()[1] : 1);
    for (double v : t.values()) put_f64(out, v);
  }
  put_u64(out, ck.adam.step);
  const bool has_moments = ck.adam.m.size() == ck.params.size() && ck.adam.v.size() == ck.params.size();
  for (const auto* moments : {&ck.adam.m, &ck.adam.v}) {
    for (std::size_t i = 0; i < ck.params.size(); ++i) {
      for (std::size_t k = 0; k < ck.params[i].size(); ++k) put_f64(out, has_moments ? (*moments)[i][k] : 0.0);
    }
  }
  if (!out) throw Error("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  Reader r(in, source);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) r.fail("not a checkpoint file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ck;
  apply_config(r, r.str(1u << 24), ck);
  ck.iteration = r.u64();
  const std::uint64_t count = r.u64();
  if (count > 1u << 20) r.fail("implausible tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.str(4096);
    const std::uint32_t rank = r.u32();
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rank > 2 || rows > (1u << 28) || cols > (1u << 28) || rows * cols > (1u << 28)) {
      r.fail("bad shape for tensor '" + name + "'");
    }
    const ad::Shape shape = rank == 0 ? ad::Shape{} : rank == 1 ? ad::Shape(rows) : ad::Shape(rows, cols);
    ad::Tensor t(shape);
    for (double& v : t.values()) v = r.f64();
    ck.params.add(std::move(name), std::move(t));
  }
  ck.adam = AdamState::zeros_for(ck.params);
  ck.adam.step = r.u64();
  for (auto* moments : {&ck.adam.m, &ck.adam.v}) {
    for (auto& t : *moments) {
      for (double& v : t.values()) v = r.f64();
    }
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, ck);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_checkpoint(in, path.string());
}

}  // namespace sthrn
