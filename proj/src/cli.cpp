#include "sthrn/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "sthrn/checkpoint.hpp"
#include "sthrn/errors.hpp"
#include "sthrn/evaluation.hpp"
#include "sthrn/kinematics.hpp"
#include "sthrn/run_config.hpp"
#include "sthrn/skeleton.hpp"
#include "sthrn/svg_plot.hpp"
#include "sthrn/synthetic.hpp"
#include "sthrn/trainer.hpp"
#include "text_util.hpp"

namespace sthrn::cli {

namespace {

std::filesystem::path sidecar_of(const std::filesystem::path& data) {
  return std::filesystem::path(data.string() + ".topology");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

// Commands -----------------------------------------------------------------

struct PreprocessArgs {
  std::string in, topology, out;
  double fps = 25.0;
};

int cmd_preprocess(const PreprocessArgs& a, std::ostream& out) {
  if (detect_motion_format(a.in) == MotionFormat::csv_lie) {
    throw ValidationError(a.in + " already holds Lie vectors (csv-lie); preprocess expects csv-joints");
  }
  const SkeletonTopology topo = load_topology(a.topology);
  const MotionSequence raw = load_motion(a.in, MotionFormat::csv_joints, topo);
  const MotionSequence seq = resample_fps(raw, a.fps);
  const SkeletonTopology normalized = normalize_lengths({seq}, topo);

  MotionSequence lie;
  lie.kind = FrameKind::lie;
  lie.fps = seq.fps;
  lie.subject = seq.subject;
  lie.activity = seq.activity;
  for (const auto& frame : seq.frames) lie.frames.push_back(pose_to_lie(frame, normalized));
  save_motion(a.out, lie);
  save_topology(sidecar_of(a.out), normalized);
  out << "wrote " << lie.frames.size() << " frames (K=" << normalized.lie_size() << ", fps "
      << detail::format_double(lie.fps) << ") to " << a.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::vector<std::string> data;
  std::string config, checkpoint, topology, metrics;
  bool no_wallclock = false;
  std::map<std::string, std::string> overrides;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg;
  if (const char* env = std::getenv("STHRN_SEED"); env != nullptr && *env != '\0') {
    try {
      set_config_value(cfg, "seed", env);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("STHRN_SEED: ") + e.what());
    }
  }
  if (!a.config.empty()) {
    std::ifstream f(a.config);
    if (!f) throw ValidationError("cannot open config file '" + a.config + "'");
    apply_config(cfg, f, a.config);
  }
  for (const auto& [k, v] : a.overrides) set_config_value(cfg, k, v);
  cfg.validate();

  const std::filesystem::path topo_path = a.topology.empty() ? sidecar_of(a.data.front()) : std::filesystem::path(a.topology);
  const SkeletonTopology topo = load_topology(topo_path);
  std::vector<MotionSequence> data;
  for (const auto& d : a.data) data.push_back(load_motion(d, MotionFormat::csv_lie, topo));

  TrainOptions opts;
  opts.checkpoint_path = a.checkpoint;
  opts.metrics_path = a.metrics.empty() ? a.checkpoint + ".metrics.csv" : a.metrics;
  opts.wallclock = !a.no_wallclock;
  const TrainResult r = train(data, topo, cfg, opts);
  out << "trained " << r.checkpoint.iteration << " iterations";
  if (!r.losses.empty()) out << ", final loss " << detail::format_double(r.losses.back());
  out << "\ncheckpoint: " << a.checkpoint << "\nmetrics: " << opts.metrics_path.string() << "\n";
  return kExitOk;
}

struct PredictArgs {
  std::string checkpoint, data, out;
  std::size_t horizon = 10;
  std::size_t observed = 0;
};

std::size_t checkpoint_observed(const Checkpoint& ck) {
  for (const auto& [k, v] : ck.settings) {
    if (k == "observed") {
      TrainConfig tmp;
      set_config_value(tmp, "observed", v);
      return tmp.observed;
    }
  }
  return 0;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  if (a.horizon == 0) throw ValidationError("--horizon must be at least 1");
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const Model model = ck.build();
  const MotionSequence seq = load_motion(a.data, MotionFormat::csv_lie);
  if (seq.width() != model.lie_size()) {
    throw ValidationError("data has " + std::to_string(seq.width()) + " Lie entries per frame, checkpoint expects " +
                          std::to_string(model.lie_size()));
  }
  std::size_t t = a.observed > 0 ? a.observed : checkpoint_observed(ck);
  if (t == 0 || t > seq.frames.size()) t = seq.frames.size();
  if (t < 2) throw ValidationError("need at least 2 observed frames");
  const std::span<const LieVector> observed(seq.frames.data() + (seq.frames.size() - t), t);

  MotionSequence result;
  result.kind = FrameKind::lie;
  result.fps = seq.fps;
  result.subject = seq.subject;
  result.activity = seq.activity;
  result.frames = model.predict(observed, a.horizon);
  save_motion(a.out, result);
  out << "predicted " << a.horizon << " frames from the last " << t << " observed frames to " << a.out << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string pred, target, out, observed, activity, method = "model";
  double fps = 0.0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const MotionSequence pred = load_motion(a.pred, MotionFormat::csv_lie);
  const MotionSequence target = load_motion(a.target, MotionFormat::csv_lie);
  if (pred.frames.size() != target.frames.size()) {
    throw ValidationError("prediction has " + std::to_string(pred.frames.size()) + " frames, target has " +
                          std::to_string(target.frames.size()));
  }
  if (pred.width() != target.width()) {
    throw ValidationError("prediction has " + std::to_string(pred.width()) + " Lie entries per frame, target has " +
                          std::to_string(target.width()));
  }
  const double fps = a.fps > 0.0 ? a.fps : target.fps;
  const HorizonGrid grid = HorizonGrid::standard(fps);
  const std::string activity =
      !a.activity.empty() ? a.activity : !target.activity.empty() ? target.activity : std::string("unknown");

  EvalReport report;
  report.horizons_ms = grid.ms;
  report.add(activity, a.method, mae_available(pred.frames, target.frames, grid));
  if (!a.observed.empty()) {
    const MotionSequence obs = load_motion(a.observed, MotionFormat::csv_lie);
    if (obs.width() != target.width()) throw ValidationError("observed file has a different K than the target");
    const auto zv = zero_velocity(obs.frames, target.frames.size());
    report.add(activity, "zero-velocity", mae_available(zv, target.frames, grid));
  }
  std::ofstream f(a.out, std::ios::binary);
  if (!f) throw Error("cannot open '" + a.out + "' for writing");
  write_report_csv(f, report);
  out << format_report_table(report);
  return kExitOk;
}

struct PlotArgs {
  std::string data, topology, frames, out;
};

std::vector<std::size_t> parse_frame_list(const std::string& text, std::size_t count) {
  std::vector<std::size_t> out;
  const auto index = [&](const std::string& s) {
    double v = 0.0;
    if (!detail::parse_double(detail::trim(s), v) || v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw ValidationError("bad frame index '" + s + "'");
    }
    const auto i = static_cast<std::size_t>(v);
    if (i >= count) {
      throw ValidationError("frame " + std::to_string(i) + " out of range (sequence has " + std::to_string(count) +
                            " frames)");
    }
    return i;
  };
  for (const auto& item : detail::split(text, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(index(item));
      continue;
    }
    const std::size_t lo = index(item.substr(0, dash));
    const std::size_t hi = index(item.substr(dash + 1));
    if (hi < lo) throw ValidationError("empty frame range '" + item + "'");
    for (std::size_t i = lo; i <= hi; ++i) out.push_back(i);
  }
  if (out.empty()) throw ValidationError("no frames selected");
  return out;
}

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  const SkeletonTopology topo = load_topology(a.topology);
  const MotionFormat format = detect_motion_format(a.data);
  const MotionSequence seq = load_motion(a.data, format, topo);
  const auto selected = parse_frame_list(a.frames, seq.frames.size());
  std::vector<Frame> joints;
  const RootConfig root = default_root(topo);
  for (std::size_t i : selected) {
    joints.push_back(format == MotionFormat::csv_lie ? lie_to_pose(seq.frames[i], topo, root) : seq.frames[i]);
  }
  write_text(a.out, render_svg(joints, selected, topo));
  out << "wrote " << selected.size() << " figures to " << a.out << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string kind = "sinusoid", topology, out;
  std::size_t frames = 200;
  std::uint64_t seed = 1;
  double fps = 25.0;
  bool joints = false;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const SkeletonTopology topo = load_topology(a.topology);
  SynthOptions opts;
  opts.fps = a.fps;
  MotionSequence seq = synth_motion(parse_synth_kind(a.kind), a.frames, topo, a.seed, opts);
  if (a.joints) seq = synth_joints(seq, topo, a.seed);
  seq.activity = a.kind;
  save_motion(a.out, seq);
  out << "wrote " << seq.frames.size() << " " << a.kind << " frames to " << a.out << "\n";
  return kExitOk;
}

std::string config_help() {
  const TrainConfig defaults;
  std::string s = "Config keys (config file `key = value`, or --key flags; flags win):\n";
  for (const auto& k : config_keys()) {
    s += "  " + k.name + " = " + get_config_value(defaults, k.name) + "    " + k.help + "\n";
  }
  s += "STHRN_SEED sets the seed when neither the config file nor --seed does.\n";
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatio-temporal hierarchical recurrent motion prediction", "sthrn"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* sp = app.add_subcommand("preprocess", "Convert csv-joints to csv-lie with normalized bone lengths");
  sp->add_option("--in", pre.in, "csv-joints input")->required();
  sp->add_option("--topology", pre.topology, "topology file")->required();
  sp->add_option("--fps", pre.fps, "target frame rate")->capture_default_str();
  sp->add_option("--out", pre.out, "csv-lie output; lengths go to <out>.topology")->required();

  TrainArgs tr;
  std::map<std::string, std::string> flag_values;
  auto* st = app.add_subcommand("train", "Train a model on csv-lie data");
  st->add_option("--data", tr.data, "csv-lie training files")->required();
  st->add_option("--config", tr.config, "config file with key = value lines");
  st->add_option("--out-checkpoint", tr.checkpoint, "checkpoint output")->required();
  st->add_option("--topology", tr.topology, "topology (default: <first data file>.topology)");
  st->add_option("--metrics", tr.metrics, "metrics CSV (default: <checkpoint>.metrics.csv)");
  st->add_flag("--no-wallclock", tr.no_wallclock, "write 0 in the wallclock column");
  for (const auto& k : config_keys()) {
    st->add_option_function<std::string>(
        "--" + k.name, [&flag_values, name = k.name](const std::string& v) { flag_values[name] = v; }, k.help);
  }
  st->footer(config_help());

  PredictArgs pr;
  auto* sr = app.add_subcommand("predict", "Predict future frames from the end of a csv-lie file");
  sr->add_option("--checkpoint", pr.checkpoint, "trained checkpoint")->required();
  sr->add_option("--data", pr.data, "csv-lie observed frames")->required();
  sr->add_option("--horizon", pr.horizon, "frames to predict")->capture_default_str();
  sr->add_option("--observed", pr.observed, "observed frames t (default: the checkpoint's, capped by the file)");
  sr->add_option("--out", pr.out, "csv-lie output")->required();

  EvalArgs ev;
  auto* se = app.add_subcommand("eval", "MAE report at the 80..1000 ms horizons");
  se->add_option("--pred", ev.pred, "csv-lie predictions")->required();
  se->add_option("--target", ev.target, "csv-lie ground truth, aligned with --pred")->required();
  se->add_option("--fps", ev.fps, "frame rate (default: the target file's)");
  se->add_option("--out", ev.out, "report CSV")->required();
  se->add_option("--observed", ev.observed, "csv-lie observed frames; adds a zero-velocity row");
  se->add_option("--activity", ev.activity, "activity label (default: from the target file)");
  se->add_option("--method", ev.method, "method label")->capture_default_str();

  PlotArgs pl;
  auto* sl = app.add_subcommand("plot", "Render selected frames as an SVG strip of stick figures");
  sl->add_option("--data", pl.data, "csv-joints or csv-lie file")->required();
  sl->add_option("--topology", pl.topology, "topology file")->required();
  sl->add_option("--frames", pl.frames, "frame list, e.g. 0,4,8 or 0-15")->required();
  sl->add_option("--out", pl.out, "SVG output")->required();

  SynthArgs sy;
  auto* ss = app.add_subcommand("synth", "Write synthetic motion with known dynamics");
  ss->add_option("--kind", sy.kind, "constant, linear-sweep or sinusoid")->capture_default_str();
  ss->add_option("--topology", sy.topology, "topology file")->required();
  ss->add_option("--frames", sy.frames, "frame count")->capture_default_str();
  ss->add_option("--seed", sy.seed, "random seed")->capture_default_str();
  ss->add_option("--fps", sy.fps, "frame rate")->capture_default_str();
  ss->add_flag("--joints", sy.joints, "write csv-joints instead of csv-lie");
  ss->add_option("--out", sy.out, "output file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (!app.get_subcommands().empty()) err << "run 'sthrn " << app.get_subcommands().front()->get_name() << " --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (sp->parsed()) return cmd_preprocess(pre, out);
    if (st->parsed()) {
      tr.overrides = flag_values;
      return cmd_train(tr, out);
    }
    if (sr->parsed()) return cmd_predict(pr, out);
    if (se->parsed()) return cmd_eval(ev, out);
    if (sl->parsed()) return cmd_plot(pl, out);
    if (ss->parsed()) return cmd_synth(sy, out);
  } catch (const NumericDivergence& e) {
    err << "error: numeric divergence at " << e.what() << "\n";
    return kExitRuntime;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace sthrn::cli
