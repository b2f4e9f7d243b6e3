#include <gtest/gtest.h>

#include <string>

#include "delaymarket/instances.hpp"
#include "delaymarket/model.hpp"
#include "oracles.hpp"

using namespace delaymarket;

namespace {

const std::string kSmall = R"({
  "system": {"A": [[1.2]], "B": [[1.0]], "Q1": [[1.0]], "Q2": [[1.0]],
             "R": [[1.0]], "W": [[2.0]]},
  "pricing": {"D": 2, "lambda": [1.0, 0.2]},
  "horizon": {"T": 3}
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

bool check_passed(const ValidationReport& rep, const char* name) {
  const ValidationCheck* c = rep.find(name);
  EXPECT_NE(c, nullptr) << name;
  return c && c->passed;
}

}  // namespace

TEST(Model, LoadsShippedConfigs) {
  for (const char* name : {"example1.json", "example2.json", "small.json"}) {
    const Problem p = load_problem_file(std::string(DELAYMARKET_CONFIG_DIR) + "/" + name);
    EXPECT_TRUE(validate(p).ok()) << name;
  }
}

TEST(Model, ShippedExampleMatchesBuiltIn) {
  const Problem file = load_problem_file(std::string(DELAYMARKET_CONFIG_DIR) + "/example1.json");
  const Problem ref = instances::example1();
  EXPECT_EQ(file.model.A, ref.model.A);
  EXPECT_EQ(file.model.B, ref.model.B);
  EXPECT_EQ(file.model.W, ref.model.W);
  EXPECT_EQ(file.model.Sigma0, ref.model.Sigma0);
  EXPECT_EQ(file.pricing.lambda, ref.pricing.lambda);
  EXPECT_EQ(file.horizon.T, ref.horizon.T);
}

TEST(Model, Sigma0DefaultsToW) {
  const Problem p = load_problem(kSmall);
  EXPECT_EQ(p.model.Sigma0, p.model.W);
  EXPECT_DOUBLE_EQ(p.model.Sigma0(0, 0), 2.0);
}

TEST(Model, SerializeRoundTripIsExact) {
  Problem p = instances::random_problem(17, 6, 3, 3, 2);
  p.model.A(0, 1) = 0.1 + 0.2;  // not representable in short decimal
  const Problem q = parse_problem(serialize_problem(p));
  EXPECT_EQ(p.model.A, q.model.A);
  EXPECT_EQ(p.model.B, q.model.B);
  EXPECT_EQ(p.model.Q1, q.model.Q1);
  EXPECT_EQ(p.model.Q2, q.model.Q2);
  EXPECT_EQ(p.model.R, q.model.R);
  EXPECT_EQ(p.model.W, q.model.W);
  EXPECT_EQ(p.model.Sigma0, q.model.Sigma0);
  EXPECT_EQ(p.pricing.lambda, q.pricing.lambda);
  EXPECT_EQ(p.horizon.T, q.horizon.T);
  EXPECT_EQ(serialize_problem(p), serialize_problem(q));
}

TEST(Model, ParseErrorReportsLineAndColumn) {
  const std::string bad = "{\n  \"system\": {\n    \"A\": [[1.0],, ]\n  }\n}";
  try {
    parse_problem(bad);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos) << e.what();
  }
}

TEST(Model, SchemaErrorsNameTheField) {
  try {
    parse_problem(replace(kSmall, "\"lambda\": [1.0, 0.2]", "\"lambda\": [1.0]"));
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("pricing.lambda"), std::string::npos) << e.what();
  }
  try {
    parse_problem(replace(kSmall, "\"A\": [[1.2]], ", ""));
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("system.A"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_problem(replace(kSmall, "\"T\": 3", "\"T\": 0")), InputError);
  EXPECT_THROW(parse_problem(replace(kSmall, "\"T\": 3", "\"T\": 2.5")), InputError);
  EXPECT_THROW(parse_problem(replace(kSmall, "[[1.2]]", "[[1.2], [1.0, 2.0]]")), InputError);
  EXPECT_THROW(parse_problem("[1, 2]"), InputError);
}

TEST(Model, StructuralErrorsOnDimensionMismatch) {
  Problem p = instances::example1();
  p.model.B = MatrixXd::Ones(3, 2);
  EXPECT_THROW(validate(p), StructuralError);
  p = instances::example1();
  p.model.R = MatrixXd::Identity(3, 3);
  EXPECT_THROW(validate(p), StructuralError);
  p = instances::example1();
  p.pricing.lambda.resize(3);
  p.pricing.lambda << 3, 2, 1;
  EXPECT_THROW(validate(p), StructuralError);
  p = instances::example1();
  p.model.W(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate(p), InputError);
}

TEST(Model, EachAssumptionIsReportedSeparately) {
  const Problem good = instances::example2();
  EXPECT_TRUE(validate(good).ok());
  EXPECT_EQ(validate(good).checks.size(), 8u);

  Problem p = good;
  p.model.Q1(0, 0) = -0.5;
  EXPECT_FALSE(check_passed(validate(p), "Q1 symmetric PSD"));

  p = good;
  p.model.W(0, 1) = 0.3;  // asymmetric
  EXPECT_FALSE(check_passed(validate(p), "W symmetric PSD"));

  p = good;
  p.model.R = MatrixXd::Zero(2, 2);
  EXPECT_FALSE(check_passed(validate(p), "R positive definite"));

  p = good;
  p.model.B.col(1) = p.model.B.col(0);
  p.model.A = MatrixXd::Identity(2, 2);
  EXPECT_FALSE(check_passed(validate(p), "(A,B) controllable"));

  p = good;
  p.model.A << 1.5, 0, 0, 0.5;
  p.model.Q1 << 0, 0, 0, 1;  // unstable mode invisible to the cost
  EXPECT_FALSE(check_passed(validate(p), "(A,Q1^1/2) detectable"));
  p.model.A << 0.9, 0, 0, 0.5;  // stable hidden mode is fine
  EXPECT_TRUE(check_passed(validate(p), "(A,Q1^1/2) detectable"));

  p = good;
  p.pricing.lambda << 10, 8, 8, 1.5, 1;
  EXPECT_FALSE(check_passed(validate(p), "prices strictly decreasing and positive"));
  p.pricing.lambda << 10, 8, 2.5, 1.5, 0;
  EXPECT_FALSE(check_passed(validate(p), "prices strictly decreasing and positive"));
}

TEST(Model, LoadListsEveryViolation) {
  std::string text = replace(kSmall, "\"Q1\": [[1.0]]", "\"Q1\": [[-1.0]]");
  text = replace(text, "[1.0, 0.2]", "[0.2, 1.0]");
  try {
    load_problem(text);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("Q1 symmetric PSD"), std::string::npos) << msg;
    EXPECT_NE(msg.find("prices strictly decreasing"), std::string::npos) << msg;
  }
}

TEST(Model, ValidateDoesNotMutate) {
  const Problem p = instances::random_problem(3, 5, 2);
  const std::string before = serialize_problem(p);
  (void)validate(p);
  EXPECT_EQ(before, serialize_problem(p));
}

TEST(Model, MissingFileIsIoError) {
  EXPECT_THROW(load_problem_file("/nonexistent/config.json"), IoError);
}

TEST(Model, RandomInstancesAreValid) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Problem p = instances::random_problem(seed, 4, 3);
    const ValidationReport rep = validate(p);
    EXPECT_TRUE(check_passed(rep, "Q1 symmetric PSD"));
    EXPECT_TRUE(check_passed(rep, "R positive definite"));
    EXPECT_TRUE(check_passed(rep, "prices strictly decreasing and positive"));
  }
}
