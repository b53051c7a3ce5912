#include <cmath>

#include <gtest/gtest.h>

#include "fminimal/errors.hpp"
#include "fminimal/expression.hpp"

using namespace fminimal;

namespace {
double eval(const char* src, Vector x) { return Expression::parse(src, static_cast<int>(x.size()))(x); }
Vector pt(double a, double b, double c) { return Vector((Vector(3) << a, b, c).finished()); }
}  // namespace

TEST(Expression, ArithmeticAndPrecedence) {
  const Vector x = pt(2, 3, 5);
  EXPECT_DOUBLE_EQ(eval("1 + 2 * 3", x), 7.0);
  EXPECT_DOUBLE_EQ(eval("(1 + 2) * 3", x), 9.0);
  EXPECT_DOUBLE_EQ(eval("8 / 4 / 2", x), 1.0);
  EXPECT_DOUBLE_EQ(eval("10 - 4 - 3", x), 3.0);
  EXPECT_DOUBLE_EQ(eval("2^3^2", x), 512.0);
  EXPECT_DOUBLE_EQ(eval("-2^2", x), -4.0);
  EXPECT_DOUBLE_EQ(eval("2^-1", x), 0.5);
  EXPECT_DOUBLE_EQ(eval("--3", x), 3.0);
  EXPECT_DOUBLE_EQ(eval("1.5e2", x), 150.0);
}

TEST(Expression, VariablesAndFunctions) {
  const Vector x = pt(0.3, -1.2, 2.0);
  EXPECT_DOUBLE_EQ(eval("x1 + x2 * x3", x), 0.3 + -1.2 * 2.0);
  EXPECT_DOUBLE_EQ(eval("sin(x1) + cos(x2) * exp(x3)", x), std::sin(0.3) + std::cos(-1.2) * std::exp(2.0));
  EXPECT_DOUBLE_EQ(eval("(x1^2 + x2^2 + x3^2)/4", x), (0.09 + 1.44 + 4.0) / 4.0);
  EXPECT_DOUBLE_EQ(eval("  x3 ", x), 2.0);
}

TEST(Expression, Errors) {
  EXPECT_THROW(Expression::parse("", 3), ParseError);
  EXPECT_THROW(Expression::parse("1 +", 3), ParseError);
  EXPECT_THROW(Expression::parse("(1 + 2", 3), ParseError);
  EXPECT_THROW(Expression::parse("x4", 3), ParseError);
  EXPECT_THROW(Expression::parse("x0", 3), ParseError);
  EXPECT_THROW(Expression::parse("tan(x1)", 3), ParseError);
  EXPECT_THROW(Expression::parse("1 $ 2", 3), ParseError);
  EXPECT_THROW(Expression::parse("2 x1", 3), ParseError);
  try {
    Expression::parse("x1 + y", 3);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
}

TEST(Expression, WrongDimensionAtEvaluation) {
  const Expression e = Expression::parse("x1", 3);
  EXPECT_THROW(e(Vector::Zero(2)), ContractViolation);
}

TEST(Expression, WeightUsesFiniteDifferences) {
  const WeightedAmbient w = expression_weight("sin(x1) + x2^2/8", 3);
  EXPECT_EQ(w.provenance(), Provenance::finite_difference);
  const Vector x = pt(0.4, 1.0, -2.0);
  EXPECT_NEAR(w.weight_grad(x)[0], std::cos(0.4), 1e-9);
  EXPECT_NEAR(w.weight_grad(x)[1], 0.25, 1e-9);
  EXPECT_NEAR(w.weight_hess(x)(0, 0), -std::sin(0.4), 1e-6);
  EXPECT_NEAR(w.weight_hess(x)(1, 1), 0.25, 1e-6);
  EXPECT_NEAR(w.weight_hess(x)(0, 1), 0.0, 1e-6);
  EXPECT_EQ(w.name(), "custom:sin(x1) + x2^2/8");
}
