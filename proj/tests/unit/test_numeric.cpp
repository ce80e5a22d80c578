#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fpt/error.hpp"
#include "fpt/numeric/checkpoint.hpp"
#include "fpt/numeric/ops.hpp"
#include "support/grad_cases.hpp"

using namespace fpt;
using fpt::testing::random_tensor;

namespace {

TensorD mat(std::initializer_list<std::initializer_list<double>> rows) {
  TensorD t(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (double v : row) t(r, c++) = v;
    ++r;
  }
  return t;
}

}  // namespace

TEST(Matmul, Identity) {
  const TensorD a = mat({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(TensorD::Identity(2, 2), a), a);
}

TEST(Matmul, SelectorRow) { EXPECT_EQ(matmul(mat({{1, 0}}), mat({{2}, {5}})), mat({{2}})); }

TEST(Matmul, HandProduct) {
  EXPECT_EQ(matmul(mat({{1, 2}, {3, 4}}), mat({{5, 6}, {7, 8}})), mat({{19, 22}, {43, 50}}));
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  try {
    matmul(TensorD::Zero(2, 3), TensorD::Zero(2, 3));
    FAIL();
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos);
    EXPECT_EQ(e.kind(), "dimension");
  }
}

TEST(Matmul, AssociativityOnRandomChains) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const TensorD a = random_tensor(rng, 3, 4);
    const TensorD b = random_tensor(rng, 4, 5);
    const TensorD c = random_tensor(rng, 5, 2);
    const TensorD left = matmul(TensorD(matmul(a, b)), c);
    const TensorD right = matmul(a, TensorD(matmul(b, c)));
    EXPECT_LE((left - right).norm() / left.norm(), 1e-9);
  }
}

TEST(Softmax, Symmetric) {
  const RowVectorD p = softmax(RowVectorD::Zero(3));
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(p(i), 1.0 / 3.0, 1e-15);
}

TEST(Softmax, StableForLargeLogits) {
  RowVectorD x(2);
  x << 1000, 0;
  const RowVectorD p = softmax(x);
  EXPECT_NEAR(p(0), 1.0, 1e-12);
  EXPECT_NEAR(p(1), 0.0, 1e-12);
}

TEST(Softmax, ClosedForm) {
  RowVectorD x(2);
  x << std::log(1.0), std::log(3.0);
  const RowVectorD p = softmax(x);
  EXPECT_NEAR(p(0), 0.25, 1e-15);
  EXPECT_NEAR(p(1), 0.75, 1e-15);
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const RowVectorD x = random_tensor(rng, 1, 7, -20, 20);
    const RowVectorD p = softmax(x);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_TRUE((p.array() > 0).all());
    const RowVectorD shifted = softmax(RowVectorD(x.array() + 123.25));
    EXPECT_LT((p - shifted).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CrossEntropy, UniformFiveClasses) {
  EXPECT_NEAR(cross_entropy(RowVectorD::Zero(5), 2), std::log(5.0), 1e-15);
  EXPECT_NEAR(cross_entropy(RowVectorD::Zero(5), 2), 1.60944, 1e-5);
}

TEST(CrossEntropy, ConfidentCorrect) {
  RowVectorD x(2);
  x << 10, -10;
  EXPECT_NEAR(cross_entropy(x, 0), std::log1p(std::exp(-20.0)), 1e-18);
  EXPECT_NEAR(cross_entropy(x, 0), 2.06e-9, 1e-11);
}

TEST(CrossEntropy, SingleClassIsZero) { EXPECT_EQ(cross_entropy(RowVectorD::Zero(1), 0), 0.0); }

TEST(CrossEntropy, LabelOutOfRange) {
  EXPECT_THROW(cross_entropy(RowVectorD::Zero(3), 3), IndexError);
  EXPECT_THROW(cross_entropy(RowVectorD::Zero(3), -1), IndexError);
}

TEST(Cosine, Examples) {
  RowVectorD a(2), b(2), c(2), d(2);
  a << 1, 0;
  b << 0, 1;
  c << 1, 2;
  d << 2, 4;
  EXPECT_DOUBLE_EQ(cosine(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine(a, b), 0.0);
  EXPECT_NEAR(cosine(c, d), 1.0, 1e-15);
}

TEST(Cosine, ZeroVectorGivesZero) {
  RowVectorD a(3);
  a << 1, 2, 3;
  EXPECT_EQ(cosine(RowVectorD::Zero(3), a), 0.0);
  EXPECT_EQ(cosine(RowVectorD::Zero(3), RowVectorD::Zero(3)), 0.0);
}

TEST(Cosine, ScaleInvariantAndSymmetric) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const RowVectorD u = random_tensor(rng, 1, 6);
    const RowVectorD v = random_tensor(rng, 1, 6);
    const double c = rng.uniform(0.01, 100.0);
    EXPECT_NEAR(cosine(u, RowVectorD(c * u)), 1.0, 1e-12);
    EXPECT_EQ(cosine(u, v), cosine(v, u));
  }
}

TEST(GradCheck, QuadraticIsExact) {
  ParamStore p;
  p.add("x", TensorD::Constant(1, 1, 3.0));
  auto f = [](const ParamStore& ps, GradientMap* g) {
    const double x = ps.at("x")(0, 0);
    if (g != nullptr) (*g)["x"] = TensorD::Constant(1, 1, 2 * x);
    return x * x;
  };
  EXPECT_LT(grad_check(f, p).max_rel_error, 1e-8);
}

TEST(GradCheck, SoftmaxCrossEntropy) {
  Rng rng(9);
  ParamStore p;
  p.add("logits", random_tensor(rng, 1, 5, -2, 2));
  auto f = [](const ParamStore& ps, GradientMap* g) {
    ad::Tape<double> tape;
    const auto x = tape.parameter("logits", ps.at("logits"));
    const auto loss = ad::cross_entropy(x, 3);
    if (g != nullptr) {
      tape.backward(loss);
      *g = tape.gradients();
    }
    return loss.scalar();
  };
  EXPECT_LT(grad_check(f, p).max_rel_error, 1e-6);
}

TEST(GradCheck, ConstantFunction) {
  ParamStore p;
  p.add("x", TensorD::Constant(2, 2, 1.5));
  auto f = [](const ParamStore&, GradientMap* g) {
    if (g != nullptr) (*g)["x"] = TensorD::Zero(2, 2);
    return 4.0;
  };
  const auto r = grad_check(f, p);
  EXPECT_EQ(r.max_rel_error, 0.0);
  EXPECT_EQ(r.coords_checked, 4u);
}

TEST(GradCheck, NonFiniteObjectiveThrows) {
  ParamStore p;
  p.add("x", TensorD::Constant(1, 1, 1.0));
  auto f = [](const ParamStore&, GradientMap* g) {
    if (g != nullptr) (*g)["x"] = TensorD::Zero(1, 1);
    return std::numeric_limits<double>::quiet_NaN();
  };
  EXPECT_THROW(grad_check(f, p), EvaluationError);
}

class OpGradient : public ::testing::TestWithParam<int> {};

TEST_P(OpGradient, TenRandomInputs) {
  const auto cases = fpt::testing::op_cases();
  const auto& op = cases.at(static_cast<std::size_t>(GetParam()));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = op.run(seed * 7919 + static_cast<std::uint64_t>(GetParam()));
    EXPECT_LT(r.max_rel_error, 1e-6) << op.name << " seed " << seed << " tensor " << r.worst_tensor
                                     << " coord " << r.worst_coord;
    EXPECT_GT(r.coords_checked, 0u);
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient,
                         ::testing::Range(0, static_cast<int>(fpt::testing::op_cases().size())),
                         [](const ::testing::TestParamInfo<int>& info) {
                           return fpt::testing::op_cases()[static_cast<std::size_t>(info.param)].name;
                         });

TEST(Tape, SharedParameterAccumulates) {
  ad::Tape<double> tape;
  const auto x = tape.parameter("x", TensorD::Constant(1, 1, 2.0));
  const auto again = tape.parameter("x", TensorD::Constant(1, 1, 2.0));
  EXPECT_EQ(x.id, again.id);
  const auto y = ad::mul(x, again);  // x^2
  tape.backward(y);
  EXPECT_DOUBLE_EQ(tape.gradients().at("x")(0, 0), 4.0);
}

TEST(Tape, BackwardNeedsScalarRoot) {
  ad::Tape<double> tape;
  const auto x = tape.parameter("x", TensorD::Zero(2, 2));
  EXPECT_THROW(tape.backward(x), DimensionError);
}

TEST(Tape, ConstantsReceiveNoGradient) {
  ad::Tape<double> tape;
  const auto c = tape.constant(TensorD::Constant(1, 1, 3.0));
  const auto x = tape.parameter("x", TensorD::Constant(1, 1, 2.0));
  tape.backward(ad::mul(c, x));
  EXPECT_EQ(tape.grad(c).size(), 0);
  EXPECT_DOUBLE_EQ(tape.gradients().at("x")(0, 0), 3.0);
}

TEST(Rng, DeterministicStreams) {
  Rng a = Rng::stream(42, "alpha");
  Rng b = Rng::stream(42, "alpha");
  Rng c = Rng::stream(42, "beta");
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs = differs || x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformRangeAndNormalMoments) {
  Rng rng(1);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.05);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(ParamStore, DuplicateNamesRejected) {
  ParamStore p;
  p.add("w", TensorD::Zero(2, 2));
  EXPECT_THROW(p.add("w", TensorD::Zero(2, 2)), Error);
}

TEST(ParamStore, NameOrderIsSorted) {
  ParamStore p;
  p.add("b", TensorD::Zero(1, 1));
  p.add("a", TensorD::Zero(1, 1));
  p.add("c.x", TensorD::Zero(1, 1));
  EXPECT_EQ(p.names(), (std::vector<std::string>{"a", "b", "c.x"}));
  EXPECT_EQ(p.names_with_prefix("c."), (std::vector<std::string>{"c.x"}));
}

TEST(ParamStore, SetChecksShape) {
  ParamStore p;
  p.add("w", TensorD::Zero(2, 2));
  EXPECT_THROW(p.set("w", TensorD::Zero(3, 2)), DimensionError);
}

TEST(ParamStore, HashTracksContents) {
  ParamStore p;
  p.add("enc.w", TensorD::Zero(2, 2));
  p.add("mlp.w", TensorD::Zero(2, 2));
  const auto enc = p.hash("enc.");
  p.at("mlp.w")(0, 0) = 1.0;
  EXPECT_EQ(p.hash("enc."), enc);
  p.at("enc.w")(1, 1) = -0.0;
  EXPECT_NE(p.hash("enc."), enc);
}

TEST(Checkpoint, BitExactRoundTrip) {
  Rng rng(77);
  ParamStore p;
  p.add("emb.token", random_tensor(rng, 7, 3));
  p.add("mlp.head.0.bias", random_tensor(rng, 1, 5));
  TensorD special(1, 4);
  special << std::numeric_limits<double>::denorm_min(), -0.0, 1e308, 0.1;
  p.add("special", special);
  const std::string bytes = checkpoint::serialize(p);
  EXPECT_EQ(bytes.substr(0, 8), "FPTCKPT1");
  const ParamStore back = checkpoint::deserialize(bytes);
  EXPECT_TRUE(back == p);
  EXPECT_EQ(checkpoint::serialize(back), bytes);
}

TEST(Checkpoint, RejectsCorruptInput) {
  ParamStore p;
  p.add("w", TensorD::Ones(2, 2));
  const std::string bytes = checkpoint::serialize(p);
  EXPECT_THROW(checkpoint::deserialize("NOTACKPT"), Error);
  EXPECT_THROW(checkpoint::deserialize(bytes.substr(0, bytes.size() - 3)), Error);
  EXPECT_THROW(checkpoint::deserialize(bytes + "x"), Error);
}

TEST(Checkpoint, LittleEndianLayout) {
  ParamStore p;
  p.add("w", TensorD::Constant(1, 1, 1.0));
  const std::string bytes = checkpoint::serialize(p);
  // magic, count, name length, name, rank, extents, one double
  ASSERT_EQ(bytes.size(), 8u + 8u + 8u + 1u + 8u + 16u + 8u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1u);
  const std::string one = bytes.substr(bytes.size() - 8);
  EXPECT_EQ(static_cast<unsigned char>(one[7]), 0x3Fu);
  EXPECT_EQ(static_cast<unsigned char>(one[6]), 0xF0u);
}
