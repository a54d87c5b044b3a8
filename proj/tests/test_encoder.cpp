#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "oracle/reference_model.hpp"
#include "sthrn/encoder.hpp"
#include "sthrn/errors.hpp"

using namespace sthrn;
using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

struct Rig {
  SkeletonTopology topo;
  ChainLayout layout;
  ParamStore store;
  Encoder encoder;

  Rig(const std::string& name, EncoderConfig cfg) : topo(testing_util::topology(name)), layout(ChainLayout::from(topo)) {
    encoder = Encoder(cfg, layout, store);
  }
};

EncoderConfig config(std::size_t hidden, std::size_t layers, bool no_t = false, bool no_s = false) {
  EncoderConfig c;
  c.hidden = hidden;
  c.layers = layers;
  c.disable_global_temporal = no_t;
  c.disable_global_spatial = no_s;
  return c;
}

std::vector<LieVector> frames_of(const SkeletonTopology& topo, std::size_t n, std::uint64_t seed) {
  return synth_motion(SynthKind::sinusoid, n, topo, seed).frames;
}

Eigen::VectorXd vec_of(Var v) {
  const auto& t = v.value();
  return Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

Var constant(Tape& tape, const Eigen::VectorXd& v) {
  return tape.leaf(Tensor::vector(std::vector<double>(v.data(), v.data() + v.size())));
}

double max_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Sets the bias rows of one gate of the packed local matrix.
void set_gate_bias(ParamStore& store, EncoderGate gate, std::size_t hidden, double value) {
  auto& b = store[store.index("encoder.gates.b")];
  for (std::size_t r = 0; r < hidden; ++r) b[static_cast<std::size_t>(gate) * hidden + r] = value;
}

// Zeroes one hidden-sized input column block of the packed local matrix for every gate.
void zero_input_block(ParamStore& store, std::size_t block, std::size_t hidden) {
  auto& w = store[store.index("encoder.gates.w")];
  const std::size_t col = 3 + block * hidden;
  for (std::size_t r = 0; r < w.shape()[0]; ++r)
    for (std::size_t c = col; c < col + hidden; ++c) w.at(r, c) = 0.0;
}

}  // namespace

TEST(EncoderInit, ZeroParametersGiveZeroStates) {
  Rig rig("tiny", config(5, 1));
  Tape tape;
  const auto params = rig.store.bind(tape);
  std::vector<Var> poses;
  for (const auto& f : frames_of(rig.topo, 3, 1))
    for (const auto& w : f) poses.push_back(tape.leaf(Tensor::vector({w.x(), w.y(), w.z()})));
  const EncoderState s = rig.encoder.init_states(params, poses, 3);
  for (const auto& v : s.h) EXPECT_EQ(vec_of(v).cwiseAbs().maxCoeff(), 0.0);
  for (const auto& v : s.g_t) EXPECT_EQ(vec_of(v).cwiseAbs().maxCoeff(), 0.0);
  for (const auto& v : s.g_s) EXPECT_EQ(vec_of(v).cwiseAbs().maxCoeff(), 0.0);
}

TEST(EncoderInit, GlobalMeansMatchDirectComputation) {
  Rig rig("human", config(4, 1));
  testing_util::randomize(rig.store, 12, 0.5);
  const auto frames = frames_of(rig.topo, 6, 2);
  Tape tape;
  const auto params = rig.store.bind(tape);
  std::vector<Var> poses;
  for (const auto& f : frames)
    for (const auto& w : f) poses.push_back(tape.leaf(Tensor::vector({w.x(), w.y(), w.z()})));
  const EncoderState s = rig.encoder.init_states(params, poses, frames.size());

  const Eigen::MatrixXd w = oracle::mat(rig.store, "encoder.embed.w");
  const Eigen::VectorXd b = oracle::vec(rig.store, "encoder.embed.b");
  const std::size_t k = rig.topo.lie_size();
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(4);
    for (const auto& f : frames) m += w * f[j] + b;
    m /= static_cast<double>(frames.size());
    EXPECT_LT(max_diff(vec_of(s.g_t[j]), m), 1e-12);
    EXPECT_LT(max_diff(vec_of(s.c_gt[j]), m), 1e-12);
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(4);
    for (std::size_t j = 0; j < k; ++j) m += w * frames[i][j] + b;
    m /= static_cast<double>(k);
    EXPECT_LT(max_diff(vec_of(s.g_s[i]), m), 1e-12);
    EXPECT_LT(max_diff(vec_of(s.h_at(i, 2)), w * frames[i][2] + b), 1e-12);
    EXPECT_EQ(vec_of(s.h_at(i, 2)), vec_of(s.c_at(i, 2)));
  }
}

TEST(EncoderInit, WrongPoseCountThrows) {
  Rig rig("tiny", config(3, 1));
  Tape tape;
  const auto params = rig.store.bind(tape);
  std::vector<Var> poses(5, tape.leaf(Tensor(ad::Shape(3))));
  EXPECT_THROW(rig.encoder.init_states(params, poses, 2), DimensionMismatch);
}

TEST(LocalCell, ZeroEverything) {
  Rig rig("tiny", config(4, 1));
  Tape tape;
  const auto params = rig.store.bind(tape);
  const Var z = tape.leaf(Tensor(ad::Shape(4)));
  CellInputs in;
  in.pose = tape.leaf(Tensor::vector({0.3, -0.2, 0.1}));
  in.left = in.same = in.right = in.spatial = in.global_spatial = in.global_temporal = {z, z};
  const CellState out = rig.encoder.local_cell_step(params, in);
  EXPECT_EQ(vec_of(out.c).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(vec_of(out.h).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LocalCell, SixEqualCellsGiveThreeTimes) {
  Rig rig("tiny", config(4, 1));
  Tape tape;
  const auto params = rig.store.bind(tape);
  const Eigen::VectorXd c0 = Eigen::Vector4d(0.4, -1.2, 2.0, 0.0);
  const Var c = constant(tape, c0);
  const Var h = constant(tape, Eigen::Vector4d(0.1, 0.2, 0.3, 0.4));
  CellInputs in;
  in.pose = tape.leaf(Tensor::vector({0.3, -0.2, 0.1}));
  in.left = in.same = in.right = in.spatial = in.global_spatial = in.global_temporal = {h, c};
  const CellState out = rig.encoder.local_cell_step(params, in);
  EXPECT_LT(max_diff(vec_of(out.c), 3.0 * c0), 1e-15);
  const Eigen::VectorXd expect_h = 0.5 * (3.0 * c0).array().tanh().matrix();
  EXPECT_LT(max_diff(vec_of(out.h), expect_h), 1e-15);
}

TEST(GlobalStep, ZeroEverything) {
  Rig rig("tiny", config(3, 1));
  Tape tape;
  const auto params = rig.store.bind(tape);
  const Var z = tape.leaf(Tensor(ad::Shape(3)));
  const std::vector<CellState> cells(4, {z, z});
  EXPECT_EQ(vec_of(rig.encoder.global_temporal_step(params, cells, {z, z}).h).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(vec_of(rig.encoder.global_spatial_step(params, cells, {z, z}).h).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GlobalStep, TemporalUniformCells) {
  Rig rig("tiny", config(3, 1));
  Tape tape;
  const auto params = rig.store.bind(tape);
  const Eigen::Vector3d c0(1.0, -0.5, 0.25), prev(0.8, 0.6, -2.0);
  const Var h = constant(tape, Eigen::Vector3d(0.3, 0.1, -0.7));
  const std::vector<CellState> cells(4, {h, constant(tape, c0)});
  const CellState g = rig.encoder.global_temporal_step(params, cells, {h, constant(tape, prev)});
  EXPECT_LT(max_diff(vec_of(g.c), 2.0 * c0 + 0.5 * prev), 1e-15);
}

TEST(GlobalStep, SpatialUniformCells) {
  Rig rig("tiny", config(3, 1));
  Tape tape;
  const auto params = rig.store.bind(tape);
  const Eigen::Vector3d c0(1.0, -0.5, 0.25), prev(0.8, 0.6, -2.0);
  const Var h = constant(tape, Eigen::Vector3d(0.3, 0.1, -0.7));
  const std::vector<CellState> cells(6, {h, constant(tape, c0)});
  const CellState g = rig.encoder.global_spatial_step(params, cells, {h, constant(tape, prev)});
  EXPECT_LT(max_diff(vec_of(g.c), 3.0 * c0 + 0.5 * prev), 1e-15);
}

TEST(GlobalStep, RandomInstanceMatchesOracle) {
  Rig rig("tiny", config(5, 1));
  testing_util::randomize(rig.store, 31, 0.4);
  Rng rng(32);
  const auto rand_vec = [&] {
    Eigen::VectorXd v(5);
    for (auto& x : v) x = rng.uniform(-1, 1);
    return v;
  };
  Tape tape;
  const auto params = rig.store.bind(tape);
  for (std::size_t count : {1u, 4u, 7u}) {
    std::vector<Eigen::VectorXd> hs, cs;
    std::vector<CellState> cells;
    for (std::size_t n = 0; n < count; ++n) {
      hs.push_back(rand_vec());
      cs.push_back(rand_vec());
      cells.push_back({constant(tape, hs.back()), constant(tape, cs.back())});
    }
    const Eigen::VectorXd gp = rand_vec(), cp = rand_vec();
    const CellState prev{constant(tape, gp), constant(tape, cp)};
    const auto t = rig.encoder.global_temporal_step(params, cells, prev);
    const auto s = rig.encoder.global_spatial_step(params, cells, prev);
    const auto ot = oracle::global_update(rig.store, "encoder.temporal", hs, cs, gp, cp);
    const auto os = oracle::global_update(rig.store, "encoder.spatial", hs, cs, gp, cp);
    EXPECT_LT(max_diff(vec_of(t.h), ot.h), 1e-12);
    EXPECT_LT(max_diff(vec_of(t.c), ot.c), 1e-12);
    EXPECT_LT(max_diff(vec_of(s.h), os.h), 1e-12);
    EXPECT_LT(max_diff(vec_of(s.c), os.c), 1e-12);
  }
}

class EncoderOracle : public ::testing::TestWithParam<std::tuple<const char*, bool, bool>> {};

TEST_P(EncoderOracle, FullPassMatches) {
  const auto [name, no_t, no_s] = GetParam();
  Rig rig(name, config(5, 3, no_t, no_s));
  testing_util::randomize(rig.store, 41, 0.3);
  const auto frames = frames_of(rig.topo, 5, 3);
  Tape tape;
  const EncoderState s = rig.encoder.encode(tape, rig.store.bind(tape), frames);
  const oracle::Grid g = oracle::encode(rig.store, rig.layout, frames, {5, 3, no_t, no_s});
  double worst = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    worst = std::max(worst, max_diff(vec_of(s.g_s[i]), g.gs[i]));
    for (std::size_t j = 0; j < rig.topo.lie_size(); ++j) {
      worst = std::max(worst, max_diff(vec_of(s.h_at(i, j)), g.h[i][j]));
      worst = std::max(worst, max_diff(vec_of(s.c_at(i, j)), g.c[i][j]));
    }
  }
  for (std::size_t j = 0; j < rig.topo.lie_size(); ++j) worst = std::max(worst, max_diff(vec_of(s.g_t[j]), g.gt[j]));
  EXPECT_LT(worst, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Variants, EncoderOracle,
                         ::testing::Values(std::make_tuple("tiny", false, false), std::make_tuple("tiny", true, false),
                                           std::make_tuple("tiny", false, true), std::make_tuple("human", false, false),
                                           std::make_tuple("mouse", true, true)));

TEST(Encode, DegenerateGridIsOneCellStep) {
  SkeletonTopology one;
  one.joints = {"a", "b", "c"};
  one.chains = {Chain{ChainRole::spine, {0, 1, 2}}};
  one.lengths = {1.0, 1.0};
  ParamStore store;
  const ChainLayout layout = ChainLayout::from(one);
  const Encoder enc(config(4, 1), layout, store);
  testing_util::randomize(store, 5, 0.3);
  const LieVector frame{Vec3(0.2, -0.4, 0.1)};

  Tape tape;
  const auto params = store.bind(tape);
  const EncoderState s = enc.encode(tape, params, std::vector<LieVector>{frame});

  const Var pose = tape.leaf(Tensor::vector({0.2, -0.4, 0.1}));
  const Var e = ad::matmul(params[enc.index().embed_w], pose) + params[enc.index().embed_b];
  const Var z = tape.leaf(Tensor(ad::Shape(4)));
  CellInputs in;
  in.pose = pose;
  in.same = in.global_spatial = in.global_temporal = {e, e};
  in.left = in.right = in.spatial = {z, z};
  const CellState cell = enc.local_cell_step(params, in);
  EXPECT_EQ(vec_of(s.h_at(0, 0)), vec_of(cell.h));
  const std::vector<CellState> only{cell};
  EXPECT_EQ(vec_of(s.g_t[0]), vec_of(enc.global_temporal_step(params, only, {e, e}).h));
  EXPECT_EQ(vec_of(s.g_s[0]), vec_of(enc.global_spatial_step(params, only, {e, e}).h));
}

TEST(Encode, VisitOrderDoesNotMatter) {
  Rig rig("human", config(4, 2));
  testing_util::randomize(rig.store, 6, 0.3);
  const auto frames = frames_of(rig.topo, 4, 8);
  Tape tape;
  const auto params = rig.store.bind(tape);
  const EncoderState base = rig.encoder.encode(tape, params, frames);
  EncodeOptions opts;
  opts.visit_order.resize(frames.size() * rig.topo.lie_size());
  std::iota(opts.visit_order.begin(), opts.visit_order.end(), std::size_t{0});
  std::reverse(opts.visit_order.begin(), opts.visit_order.end());
  Rng rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    const EncoderState s = rig.encoder.encode(tape, params, frames, opts);
    for (std::size_t k = 0; k < base.h.size(); ++k) {
      ASSERT_EQ(s.h[k].value(), base.h[k].value());
      ASSERT_EQ(s.c[k].value(), base.c[k].value());
    }
    for (std::size_t j = 0; j < base.g_t.size(); ++j) ASSERT_EQ(s.g_t[j].value(), base.g_t[j].value());
    for (std::size_t i = 0; i < base.g_s.size(); ++i) ASSERT_EQ(s.g_s[i].value(), base.g_s[i].value());
    for (std::size_t n = opts.visit_order.size() - 1; n > 0; --n) {
      std::swap(opts.visit_order[n], opts.visit_order[rng.uniform_int(0, n)]);
    }
  }
  opts.visit_order.pop_back();
  EXPECT_THROW(rig.encoder.encode(tape, params, frames, opts), ValidationError);
}

// A disabled global state matches the full model whose channel is shut:
// its input weights are zero and its forget gate is saturated closed.
TEST(Encode, AblationEqualsClosedChannel) {
  for (int which = 0; which < 2; ++which) {
    SCOPED_TRACE(which == 0 ? "temporal" : "spatial");
    Rig full("tiny", config(4, 3));
    Rig ablated("tiny", config(4, 3, which == 0, which == 1));
    testing_util::randomize(full.store, 51, 0.4);
    const EncoderGate gate = which == 0 ? EncoderGate::global_temporal : EncoderGate::global_spatial;
    zero_input_block(full.store, which == 0 ? 5 : 4, 4);
    set_gate_bias(full.store, gate, 4, -1000.0);
    ablated.store = full.store;

    const auto frames = frames_of(full.topo, 5, 4);
    Tape tape;
    const EncoderState a = full.encoder.encode(tape, full.store.bind(tape), frames);
    const EncoderState b = ablated.encoder.encode(tape, ablated.store.bind(tape), frames);
    for (std::size_t k = 0; k < a.h.size(); ++k) {
      EXPECT_LT(max_diff(vec_of(a.h[k]), vec_of(b.h[k])), 1e-12);
      EXPECT_LT(max_diff(vec_of(a.c[k]), vec_of(b.c[k])), 1e-12);
    }
  }
}

TEST(Encode, RowsIndependentWithoutSpatialChannels) {
  Rig rig("tiny", config(4, 3, true, true));
  testing_util::randomize(rig.store, 61, 0.4);
  zero_input_block(rig.store, 3, 4);
  set_gate_bias(rig.store, EncoderGate::spatial, 4, -1000.0);
  auto frames = frames_of(rig.topo, 5, 9);
  Tape tape;
  const auto params = rig.store.bind(tape);
  const EncoderState base = rig.encoder.encode(tape, params, frames);
  for (auto& f : frames) f[1] += Vec3(0.3, -0.2, 0.5);
  const EncoderState moved = rig.encoder.encode(tape, params, frames);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t j : {0u, 2u, 3u}) EXPECT_EQ(moved.h_at(i, j).value(), base.h_at(i, j).value());
    EXPECT_NE(moved.h_at(i, 1).value(), base.h_at(i, 1).value());
  }
}

TEST(Encode, StatesBounded) {
  Rig rig("human", config(6, 3));
  testing_util::randomize(rig.store, 71, 2.0);
  const auto frames = frames_of(rig.topo, 6, 1);
  Tape tape;
  const EncoderState s = rig.encoder.encode(tape, rig.store.bind(tape), frames);
  for (const auto& v : s.h) EXPECT_LE(vec_of(v).cwiseAbs().maxCoeff(), 1.0);
  for (const auto& v : s.g_t) EXPECT_LE(vec_of(v).cwiseAbs().maxCoeff(), 1.0);
  for (const auto& v : s.g_s) EXPECT_LE(vec_of(v).cwiseAbs().maxCoeff(), 1.0);
}

TEST(Encode, ParameterCountIndependentOfLengthAndDepth) {
  const auto layout = ChainLayout::from(testing_util::topology("human"));
  ParamStore a, b;
  const Encoder shallow(config(7, 1), layout, a);
  const Encoder deep(config(7, 10), layout, b);
  EXPECT_EQ(a.scalar_count(), b.scalar_count());
  const std::size_t h = 7;
  EXPECT_EQ(a.scalar_count(), 4 * h + 9 * h * (3 + 6 * h) + 9 * h + 6 * (2 * h * h + h));

  Rig rig("tiny", config(3, 2));
  const std::size_t before = rig.store.scalar_count();
  Tape tape;
  const auto params = rig.store.bind(tape);
  for (std::size_t n : {2u, 9u, 30u}) EXPECT_NO_THROW(rig.encoder.encode(tape, params, frames_of(rig.topo, n, 1)));
  EXPECT_EQ(rig.store.scalar_count(), before);
}
