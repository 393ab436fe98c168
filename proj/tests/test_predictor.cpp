#include <gtest/gtest.h>

#include "offload/errors.hpp"
#include "offload/predictor.hpp"
#include "support.hpp"

using namespace offload;

namespace {

Task with_truth(TaskId id, std::int64_t truth) {
  Task t;
  t.id = id;
  t.true_output_tokens = truth;
  return t;
}

}  // namespace

TEST(Predict, OracleReturnsTruth) { EXPECT_EQ(Predictor::oracle().predict(with_truth(0, 57)), 57); }

TEST(Predict, ConstantIgnoresTask) {
  const auto p = Predictor::constant(100);
  EXPECT_EQ(p.predict(with_truth(0, 57)), 100);
  EXPECT_EQ(p.predict(with_truth(1, 3000)), 100);
}

TEST(Predict, ZeroNoiseCollapsesToOracle) { EXPECT_EQ(Predictor::noisy(0.0, 3).predict(with_truth(4, 57)), 57); }

TEST(Predict, NoisyIsKeyedByTaskId) {
  const auto p = Predictor::noisy(0.3, 11);
  const auto a = p.predict(with_truth(7, 200));
  for (TaskId other = 0; other < 20; ++other) p.predict(with_truth(other, 100));
  EXPECT_EQ(p.predict(with_truth(7, 200)), a);
  EXPECT_EQ(Predictor::noisy(0.3, 11).predict(with_truth(7, 200)), a);
}

TEST(Predict, NoisyIsNonNegativeAndCentered) {
  const auto p = Predictor::noisy(0.5, 2);
  double sum = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto v = p.predict(with_truth(static_cast<TaskId>(i), 100));
    EXPECT_GE(v, 0);
    sum += static_cast<double>(v);
  }
  // Clipping at zero adds a small upward bias; 4 standard errors of the mean is 3.2.
  EXPECT_NEAR(sum / n, 100.0, 4.0);
}

TEST(Predict, ConstantSpecFallsBackToTraceMean) {
  PredictorSpec spec;
  spec.kind = PredictorKind::Constant;
  EXPECT_EQ(Predictor::from_spec(spec, 212.4, 1).predict(with_truth(0, 1)), 212);
  spec.mean = 80.0;
  EXPECT_EQ(Predictor::from_spec(spec, 212.4, 1).predict(with_truth(0, 1)), 80);
}

TEST(Predict, FromTableLooksUpById) {
  const auto p = Predictor::from_table({{3, 44}, {9, 0}});
  EXPECT_EQ(p.predict(with_truth(3, 1000)), 44);
  EXPECT_EQ(p.predict(with_truth(9, 1000)), 0);
  EXPECT_THROW(p.predict(with_truth(4, 1000)), LookupError);
}

TEST(PredictionsFile, RoundTrip) {
  const PredictionTable table{{0, 57}, {1, 100}, {12, 3}};
  const auto dir = fixtures::scratch_dir("predictions_roundtrip");
  save_predictions(table, dir / "p.csv");
  EXPECT_EQ(load_predictions(dir / "p.csv"), table);
  const auto p = Predictor::from_table(load_predictions(dir / "p.csv"));
  EXPECT_EQ(p.predict(with_truth(12, 999)), 3);
}

TEST(PredictionsFile, HeaderOnlyIsEmpty) {
  const auto dir = fixtures::scratch_dir("predictions_empty");
  const auto path = fixtures::write_file(dir / "p.csv", std::string(kPredictionsHeader) + "\n");
  EXPECT_TRUE(load_predictions(path).empty());
  save_predictions({}, dir / "q.csv");
  EXPECT_TRUE(load_predictions(dir / "q.csv").empty());
}

TEST(PredictionsFile, RejectsBadRows) {
  const auto dir = fixtures::scratch_dir("predictions_bad");
  const std::string h = std::string(kPredictionsHeader) + "\n";
  EXPECT_THROW(load_predictions(fixtures::write_file(dir / "a.csv", h + "1,5\n1,6\n")), ParseError);
  EXPECT_THROW(load_predictions(fixtures::write_file(dir / "b.csv", h + "1,-5\n")), ValidationError);
  EXPECT_THROW(load_predictions(fixtures::write_file(dir / "c.csv", h + "1\n")), ParseError);
  EXPECT_THROW(load_predictions(fixtures::write_file(dir / "d.csv", "id,len\n")), ParseError);
}
