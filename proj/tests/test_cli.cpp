#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <sstream>

#include "sthrn/checkpoint.hpp"
#include "sthrn/cli.hpp"
#include "sthrn/errors.hpp"
#include "sthrn/evaluation.hpp"
#include "sthrn/run_config.hpp"
#include "sthrn/synthetic.hpp"
#include "test_util.hpp"

using namespace sthrn;
using testing_util::TempDir;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string topo_path(const std::string& name) {
  return (testing_util::data_dir() / "topologies" / (name + ".topology")).string();
}

std::string s(const std::filesystem::path& p) { return p.string(); }

// A fast training setup on the tiny topology.
std::vector<std::string> train_args(const std::string& data, const std::string& ckpt, const std::string& metrics) {
  return {"train", "--data", data, "--topology", topo_path("tiny"), "--out-checkpoint", ckpt, "--metrics", metrics,
          "--hidden", "3", "--layers", "1", "--observed", "5", "--horizon", "3", "--batch_size", "2",
          "--iterations", "3", "--no-wallclock"};
}

std::string write_synth(const TempDir& dir, const std::string& name, const std::string& kind, std::size_t frames,
                        const std::string& topo = "tiny") {
  const std::string path = s(dir / name);
  const Result r = run({"synth", "--kind", kind, "--topology", topo_path(topo), "--frames", std::to_string(frames),
                        "--seed", "3", "--out", path});
  EXPECT_EQ(r.code, 0) << r.err;
  return path;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"predict", "--data", "x.csv"}).code, 2);
  const Result help = run({"train", "--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("learning_rate"), std::string::npos);
}

TEST(Cli, MissingInputExitsTwo) {
  TempDir dir("cli_missing");
  const Result r = run({"plot", "--data", s(dir / "none.csv"), "--topology", topo_path("tiny"), "--frames", "0",
                        "--out", s(dir / "a.svg")});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, PreprocessJointsToLie) {
  TempDir dir("cli_pre");
  const auto topo = testing_util::topology("human");
  MotionSequence lie = synth_motion(SynthKind::sinusoid, 40, topo, 5, {50.0});
  const MotionSequence joints = synth_joints(lie, topo, 5);
  save_motion(dir / "raw.csv", joints);

  const Result r = run({"preprocess", "--in", s(dir / "raw.csv"), "--topology", topo_path("human"), "--fps", "25",
                        "--out", s(dir / "clean.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const MotionSequence out = load_motion(dir / "clean.csv", MotionFormat::csv_lie);
  EXPECT_EQ(out.frames.size(), 20u);
  EXPECT_EQ(out.width(), 12u);
  EXPECT_DOUBLE_EQ(out.fps, 25.0);
  for (std::size_t i = 0; i < out.frames.size(); ++i) {
    for (std::size_t k = 0; k < 12; ++k) EXPECT_LT((out.frames[i][k] - lie.frames[2 * i][k]).norm(), 1e-9);
  }
  const auto sidecar = load_topology(dir / "clean.csv.topology");
  for (std::size_t b = 0; b < topo.lengths.size(); ++b) EXPECT_NEAR(sidecar.lengths[b], topo.lengths[b], 1e-12);

  const Result again = run({"preprocess", "--in", s(dir / "clean.csv"), "--topology", topo_path("human"), "--out",
                            s(dir / "twice.csv")});
  EXPECT_EQ(again.code, 2);
  EXPECT_NE(again.err.find("csv-lie"), std::string::npos);
}

TEST(Cli, TrainIsReproducible) {
  TempDir dir("cli_train");
  const std::string data = write_synth(dir, "d.csv", "sinusoid", 30);
  ASSERT_EQ(run(train_args(data, s(dir / "a.ckpt"), s(dir / "a.csv"))).code, 0);
  ASSERT_EQ(run(train_args(data, s(dir / "b.ckpt"), s(dir / "b.csv"))).code, 0);
  EXPECT_EQ(testing_util::slurp(dir / "a.csv"), testing_util::slurp(dir / "b.csv"));
  EXPECT_EQ(testing_util::slurp(dir / "a.ckpt"), testing_util::slurp(dir / "b.ckpt"));
}

TEST(Cli, ZeroIterationsGivesInitialization) {
  TempDir dir("cli_init");
  const std::string data = write_synth(dir, "d.csv", "sinusoid", 30);
  auto args = train_args(data, s(dir / "a.ckpt"), s(dir / "a.csv"));
  args[std::find(args.begin(), args.end(), "--iterations") - args.begin() + 1] = "0";
  args.insert(args.end(), {"--seed", "4"});
  ASSERT_EQ(run(args).code, 0);
  const Checkpoint ck = load_checkpoint(dir / "a.ckpt");
  Model fresh(ck.model, ck.layout);
  Rng rng(4);
  fresh.params().init_gaussian(rng, 0.1);
  EXPECT_EQ(ck.params, fresh.params());
  EXPECT_EQ(ck.iteration, 0u);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  TempDir dir("cli_cfg");
  const std::string data = write_synth(dir, "d.csv", "sinusoid", 30);
  {
    std::ofstream f(dir / "run.cfg");
    f << "# tiny run\nseed = 11\nlearning_rate = 0.01\n";
  }
  auto args = train_args(data, s(dir / "a.ckpt"), s(dir / "a.csv"));
  args.insert(args.end(), {"--config", s(dir / "run.cfg"), "--learning_rate", "0.02"});
  ASSERT_EQ(run(args).code, 0);
  const Checkpoint ck = load_checkpoint(dir / "a.ckpt");
  std::map<std::string, std::string> settings(ck.settings.begin(), ck.settings.end());
  EXPECT_EQ(settings["seed"], "11");
  EXPECT_EQ(settings["learning_rate"], "0.02");

  {
    std::ofstream f(dir / "bad.cfg");
    f << "seed = 1\nwidth = 3\n";
  }
  auto bad = train_args(data, s(dir / "b.ckpt"), s(dir / "b.csv"));
  bad.insert(bad.end(), {"--config", s(dir / "bad.cfg")});
  const Result r = run(bad);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":2"), std::string::npos);
}

TEST(Cli, SeedFromEnvironment) {
  TempDir dir("cli_env");
  const std::string data = write_synth(dir, "d.csv", "sinusoid", 30);
  ::setenv("STHRN_SEED", "23", 1);
  const Result from_env = run(train_args(data, s(dir / "a.ckpt"), s(dir / "a.csv")));
  auto explicit_seed = train_args(data, s(dir / "b.ckpt"), s(dir / "b.csv"));
  explicit_seed.insert(explicit_seed.end(), {"--seed", "5"});
  const Result flag = run(explicit_seed);
  ::unsetenv("STHRN_SEED");
  ASSERT_EQ(from_env.code, 0);
  ASSERT_EQ(flag.code, 0);
  auto with_23 = train_args(data, s(dir / "c.ckpt"), s(dir / "c.csv"));
  with_23.insert(with_23.end(), {"--seed", "23"});
  ASSERT_EQ(run(with_23).code, 0);
  EXPECT_EQ(testing_util::slurp(dir / "a.csv"), testing_util::slurp(dir / "c.csv"));
  EXPECT_NE(testing_util::slurp(dir / "b.csv"), testing_util::slurp(dir / "c.csv"));
}

TEST(Cli, DivergenceExitsOne) {
  TempDir dir("cli_nan");
  const std::string data = write_synth(dir, "d.csv", "sinusoid", 30);
  auto args = train_args(data, s(dir / "a.ckpt"), s(dir / "a.csv"));
  args.insert(args.end(), {"--init_std", "1e300", "--loss", "l2"});
  const Result r = run(args);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("iteration 1"), std::string::npos) << r.err;
}

TEST(Cli, PredictMatchesLibrary) {
  TempDir dir("cli_predict");
  const std::string data = write_synth(dir, "d.csv", "sinusoid", 30);
  ASSERT_EQ(run(train_args(data, s(dir / "a.ckpt"), s(dir / "a.csv"))).code, 0);
  const Result r = run({"predict", "--checkpoint", s(dir / "a.ckpt"), "--data", data, "--horizon", "10", "--out",
                        s(dir / "p.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const MotionSequence pred = load_motion(dir / "p.csv", MotionFormat::csv_lie);
  ASSERT_EQ(pred.frames.size(), 10u);

  const Checkpoint ck = load_checkpoint(dir / "a.ckpt");
  const MotionSequence seq = load_motion(data, MotionFormat::csv_lie);
  const std::vector<LieVector> observed(seq.frames.end() - 5, seq.frames.end());
  MotionSequence expect;
  expect.fps = seq.fps;
  expect.activity = seq.activity;
  expect.frames = ck.build().predict(observed, 10);
  save_motion(dir / "lib.csv", expect);
  EXPECT_EQ(testing_util::slurp(dir / "p.csv"), testing_util::slurp(dir / "lib.csv"));

  const std::string human = write_synth(dir, "h.csv", "sinusoid", 30, "human");
  EXPECT_EQ(run({"predict", "--checkpoint", s(dir / "a.ckpt"), "--data", human, "--out", s(dir / "q.csv")}).code, 2);
}

TEST(Cli, PredictZeroCheckpointRepeatsLastFrame) {
  TempDir dir("cli_zero");
  const auto topo = testing_util::topology("tiny");
  ModelConfig cfg;
  cfg.encoder.hidden = 2;
  cfg.encoder.layers = 1;
  const Model model(cfg, ChainLayout::from(topo));
  save_checkpoint(dir / "z.ckpt", make_checkpoint(model, topo.entry_lengths()));
  const std::string data = write_synth(dir, "d.csv", "sinusoid", 12);
  ASSERT_EQ(run({"predict", "--checkpoint", s(dir / "z.ckpt"), "--data", data, "--horizon", "4", "--out",
                 s(dir / "p.csv")})
                .code,
            0);
  const MotionSequence seq = load_motion(data, MotionFormat::csv_lie);
  const MotionSequence pred = load_motion(dir / "p.csv", MotionFormat::csv_lie);
  ASSERT_EQ(pred.frames.size(), 4u);
  for (const auto& f : pred.frames) EXPECT_EQ(f, seq.frames.back());
}

TEST(Cli, EvalReports) {
  TempDir dir("cli_eval");
  const auto topo = testing_util::topology("tiny");
  const MotionSequence sweep = synth_motion(SynthKind::linear_sweep, 60, topo, 2);
  MotionSequence obs = sweep, tgt = sweep;
  obs.frames.assign(sweep.frames.begin(), sweep.frames.begin() + 20);
  tgt.frames.assign(sweep.frames.begin() + 20, sweep.frames.begin() + 45);
  save_motion(dir / "obs.csv", obs);
  save_motion(dir / "tgt.csv", tgt);

  const Result same = run({"eval", "--pred", s(dir / "tgt.csv"), "--target", s(dir / "tgt.csv"), "--out",
                           s(dir / "r.csv"), "--observed", s(dir / "obs.csv"), "--method", "oracle"});
  ASSERT_EQ(same.code, 0) << same.err;
  std::ifstream in(dir / "r.csv");
  const EvalReport report = read_report_csv(in);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].method, "oracle");
  for (const auto& v : report.rows[0].values) EXPECT_EQ(*v, 0.0);
  EXPECT_EQ(report.rows[1].method, "zero-velocity");
  const HorizonGrid grid = HorizonGrid::standard();
  for (std::size_t n = 0; n < grid.frames.size(); ++n) {
    EXPECT_NEAR(*report.rows[1].values[n], 0.01 * static_cast<double>(grid.frames[n]), 1e-12);
  }

  save_motion(dir / "short.csv", obs);
  EXPECT_EQ(run({"eval", "--pred", s(dir / "short.csv"), "--target", s(dir / "tgt.csv"), "--out", s(dir / "x.csv")})
                .code,
            2);
}

TEST(Cli, EvalConstantZeroVelocity) {
  TempDir dir("cli_const");
  const auto topo = testing_util::topology("tiny");
  const MotionSequence c = synth_motion(SynthKind::constant, 50, topo, 2);
  MotionSequence obs = c, tgt = c;
  obs.frames.resize(10);
  tgt.frames.resize(25);
  save_motion(dir / "obs.csv", obs);
  save_motion(dir / "tgt.csv", tgt);
  ASSERT_EQ(run({"eval", "--pred", s(dir / "tgt.csv"), "--target", s(dir / "tgt.csv"), "--observed",
                 s(dir / "obs.csv"), "--out", s(dir / "r.csv")})
                .code,
            0);
  std::ifstream in(dir / "r.csv");
  for (const auto& row : read_report_csv(in).rows)
    for (const auto& v : row.values) EXPECT_EQ(*v, 0.0);
}

TEST(Cli, PlotIsDeterministicAndInBounds) {
  TempDir dir("cli_plot");
  const std::string data = write_synth(dir, "walk.csv", "sinusoid", 40, "human");
  const std::vector<std::string> base{"plot", "--data", data, "--topology", topo_path("human"), "--frames", "0-15"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", s(dir / "a.svg")});
  b.insert(b.end(), {"--out", s(dir / "b.svg")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  const std::string svg = testing_util::slurp(dir / "a.svg");
  EXPECT_EQ(svg, testing_util::slurp(dir / "b.svg"));

  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, std::regex("viewBox=\"0 0 ([0-9.]+) ([0-9.]+)\"")));
  const double w = std::stod(m[1]), h = std::stod(m[2]);
  std::size_t figures = 0;
  for (auto it = svg.find("class=\"figure\""); it != std::string::npos; it = svg.find("class=\"figure\"", it + 1))
    ++figures;
  EXPECT_EQ(figures, 16u);
  const std::regex point("(-?[0-9.]+),(-?[0-9.]+)");
  const std::regex points_attr("points=\"([^\"]*)\"");
  std::size_t seen = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), points_attr); it != std::sregex_iterator(); ++it) {
    const std::string pts = (*it)[1];
    for (auto p = std::sregex_iterator(pts.begin(), pts.end(), point); p != std::sregex_iterator(); ++p) {
      const double x = std::stod((*p)[1]), y = std::stod((*p)[2]);
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, w);
      EXPECT_GE(y, 0.0);
      EXPECT_LE(y, h);
      ++seen;
    }
  }
  EXPECT_GT(seen, 16u * 17u);

  auto one = base;
  one[6] = "3";
  one.insert(one.end(), {"--out", s(dir / "one.svg")});
  ASSERT_EQ(run(one).code, 0);
  const std::string single = testing_util::slurp(dir / "one.svg");
  EXPECT_EQ(single.find("class=\"figure\""), single.rfind("class=\"figure\""));

  auto bad = base;
  bad[6] = "0,99";
  bad.insert(bad.end(), {"--out", s(dir / "bad.svg")});
  EXPECT_EQ(run(bad).code, 2);
}

TEST(Cli, BinaryExitCodes) {
  TempDir dir("cli_bin");
  const std::string tool = STHRN_TOOL;
  const std::string out = s(dir / "log.txt");
  EXPECT_EQ(WEXITSTATUS(std::system((tool + " > " + out + " 2>&1").c_str())), 2);
  const std::string synth = tool + " synth --kind constant --topology " + topo_path("tiny") +
                            " --frames 5 --out " + s(dir / "c.csv") + " > " + out + " 2>&1";
  EXPECT_EQ(WEXITSTATUS(std::system(synth.c_str())), 0);
  EXPECT_EQ(load_motion(dir / "c.csv", MotionFormat::csv_lie).frames.size(), 5u);
}

TEST(RunConfig, KeysRoundtrip) {
  TrainConfig cfg;
  cfg.model.encoder.hidden = 9;
  cfg.model.decoder = DecoderKind::plain_lstm;
  cfg.loss = LossKind::l2;
  cfg.learning_rate = 0.0025;
  cfg.teacher_forcing = true;
  std::istringstream in(dump_config(cfg));
  TrainConfig back;
  apply_config(back, in);
  EXPECT_EQ(dump_config(back), dump_config(cfg));
  for (const auto& k : config_keys()) EXPECT_EQ(get_config_value(back, k.name), get_config_value(cfg, k.name));
  EXPECT_THROW(set_config_value(back, "hidden", "-3"), ValidationError);
  EXPECT_THROW(set_config_value(back, "nope", "1"), ValidationError);
  std::istringstream bad("hidden = 4\n\nlayers 3\n");
  try {
    apply_config(back, bad, "x.cfg");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}
