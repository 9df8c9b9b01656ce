#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace noonsim;

namespace {

const double kPi = std::numbers::pi;

struct HvFixture : ::testing::Test {
    ModeRegistry reg = ModeRegistry::from_names({"a_h", "a_v"});
    ModeLabel h = ModeLabel::parse("a_h"), v = ModeLabel::parse("a_v");
    OpPolynomial ah = OpPolynomial::mode(reg, h), av = OpPolynomial::mode(reg, v);
};

} // namespace

TEST_F(HvFixture, MultiplyExamples) {
    const auto hv = poly_multiply(ah, av);
    EXPECT_EQ(hv.coefficients().size(), 1u);
    EXPECT_EQ(hv.coefficient({1, 1}), Amplitude(1.0));
    const auto diff = poly_multiply(poly_add(ah, av), poly_add(ah, av.scaled(-1.0)));
    EXPECT_EQ(diff.to_string(), "a_h^2 - a_v^2");
    EXPECT_EQ(diff.coefficients().size(), 2u);
}

TEST_F(HvFixture, PowerAndDegree) {
    const auto p = poly_power(poly_add(ah, av), 3);
    EXPECT_EQ(p.degree(), 3u);
    EXPECT_NEAR(std::abs(p.coefficient({2, 1}) - 3.0), 0.0, 1e-15);
    EXPECT_EQ(poly_power(ah, 0).coefficient({0, 0}), Amplitude(1.0));
}

TEST(BunchingProduct, SmallCases) {
    const auto axis = PolarizationAxis::of("a", PolBasis::hv);
    EXPECT_EQ(bunching_product(1, 0.0, axis).to_string(), "a_h + a_v");
    EXPECT_EQ(bunching_product(2, 0.0, axis).to_string(), "a_h^2 - a_v^2");
    EXPECT_EQ(bunching_product(4, 0.0, axis).to_string(), "a_h^4 - a_v^4");
    EXPECT_THROW(bunching_product(0, 0.0, axis), std::invalid_argument);
}

TEST(BunchingProduct, TwoMonomialIdentityOverGrid) {
    const auto axis = PolarizationAxis::of("b", PolBasis::rl);
    for (unsigned n = 1; n <= 8; ++n) {
        for (int k = 0; k < 16; ++k) {
            const double theta = k * kPi / 8.0;
            const auto p = bunching_product(n, theta, axis);
            ASSERT_EQ(p.coefficients().size(), 2u) << "n=" << n << " theta=" << theta;
            // registry order is (b_r, b_l): l sorts before r
            const Amplitude plus = p.coefficient(p.registry().index_of(axis.plus) == 0
                                                     ? ExponentVector{n, 0}
                                                     : ExponentVector{0, n});
            const Amplitude minus = p.coefficient(p.registry().index_of(axis.minus) == 0
                                                      ? ExponentVector{n, 0}
                                                      : ExponentVector{0, n});
            const Amplitude expected = -std::polar(1.0, n * kPi + theta);
            EXPECT_LT(std::abs(minus / plus - expected), 1e-10);
            EXPECT_LT(std::abs(plus - 1.0), 1e-12);
        }
    }
}

TEST(PolyApply, SumOfSquaresOnTwoPairSinglet) {
    const auto s = singlet_term(2);
    const auto &reg = s.registry();
    const auto p = poly_add(poly_power(OpPolynomial::mode(reg, ModeLabel::parse("a_h")), 2),
                            poly_power(OpPolynomial::mode(reg, ModeLabel::parse("a_v")), 2));
    const auto out = poly_apply(p, s);
    // Hand expansion: sqrt2 (|0,0>|0,2> + |0,0>|2,0>) / sqrt3
    PureState expected(reg);
    expected.add({0, 0, 0, 2}, std::sqrt(2.0 / 3.0));
    expected.add({0, 0, 2, 0}, std::sqrt(2.0 / 3.0));
    EXPECT_LT(max_abs_difference(out, expected), 1e-14);
}

TEST(PolyApply, CoincidenceOperator) {
    const auto reg = ModeRegistry::from_names({"a_h", "a_v"});
    const auto hv = OpPolynomial::product_of(reg, {ModeLabel::parse("a_h"), ModeLabel::parse("a_v")});
    const auto out = poly_apply(hv, PureState::basis(reg, {1, 1}));
    EXPECT_LT(std::abs(out.amplitude({0, 0}) - 1.0), 1e-15);
    EXPECT_TRUE(poly_apply(hv, PureState::basis(reg, {2, 0})).terms().empty());
}

TEST(PolyApply, LinearInPolynomialAndState) {
    std::mt19937_64 rng(21);
    const auto reg = ModeRegistry::polarized({"a"});
    const auto h = OpPolynomial::mode(reg, ModeLabel::parse("a_h"));
    const auto v = OpPolynomial::mode(reg, ModeLabel::parse("a_v"));
    const auto p = poly_multiply(h, v), q = poly_power(poly_add(h, v.scaled({0, 1})), 2);
    const Amplitude c(0.3, -1.2);
    for (int i = 0; i < 5; ++i) {
        const auto s = testutil::random_state(reg, 4, rng), t = testutil::random_state(reg, 4, rng);
        EXPECT_LT(max_abs_difference(poly_apply(poly_add(p, q.scaled(c)), s),
                                     poly_apply(p, s) + poly_apply(q, s).scaled(c)),
                  1e-12);
        EXPECT_LT(max_abs_difference(poly_apply(p, s + t.scaled(c)),
                                     poly_apply(p, s) + poly_apply(p, t).scaled(c)),
                  1e-12);
    }
}

TEST(PolyTransform, WaveplateTargets) {
    const auto reg = ModeRegistry::polarized({"a"});
    const auto hv = OpPolynomial::product_of(reg, {ModeLabel::parse("a_h"), ModeLabel::parse("a_v")});
    const auto h2 = poly_power(OpPolynomial::mode(reg, ModeLabel::parse("a_h")), 2);
    const auto v2 = poly_power(OpPolynomial::mode(reg, ModeLabel::parse("a_v")), 2);

    const auto half = poly_transform(hv, embed_polarization(hwp(kPi / 8.0), "a", reg));
    EXPECT_TRUE(equal_up_to_global_phase(half, poly_add(h2, v2.scaled(-1.0)).scaled(0.5)));
    const auto quarter = poly_transform(hv, embed_polarization(qwp(kPi / 4.0), "a", reg));
    EXPECT_TRUE(equal_up_to_global_phase(quarter, poly_add(h2, v2).scaled(0.5)));
    const auto same = poly_transform(hv, ModeUnitary::identity(reg));
    EXPECT_TRUE(approx_equal(same, hv));
}

TEST(PolyTransform, CovarianceContractOnRandomInputs) {
    std::mt19937_64 rng(99);
    const auto reg = ModeRegistry::polarized({"a", "b"});
    for (int i = 0; i < 8; ++i) {
        const ModeUnitary U{reg, testutil::random_unitary(4, rng)};
        const auto s = testutil::random_state(reg, 3, rng);
        const auto m1 = OpPolynomial::mode(reg, reg.labels()[i % 4]);
        const auto m2 = OpPolynomial::mode(reg, reg.labels()[(i + 1) % 4], {0.5, 0.5});
        const auto p = poly_multiply(poly_add(m1, m2), m1);
        const auto lhs = poly_apply(poly_transform(p, U), apply_unitary(U, s));
        const auto rhs = apply_unitary(U, poly_apply(p, s));
        EXPECT_LT(max_abs_difference(lhs, rhs), 1e-10);
    }
}

TEST(PolyTransform, Composes) {
    std::mt19937_64 rng(17);
    const auto reg = ModeRegistry::polarized({"a", "b"});
    const ModeUnitary U1{reg, testutil::random_unitary(4, rng)};
    const ModeUnitary U2{reg, testutil::random_unitary(4, rng)};
    const auto p = poly_power(OpPolynomial::linear(reg, {{ModeLabel::parse("a_h"), 1.0},
                                                         {ModeLabel::parse("b_v"), {0.0, 2.0}}}),
                              3);
    EXPECT_TRUE(approx_equal(poly_transform(poly_transform(p, U1), U2),
                             poly_transform(p, compose(U2, U1))));
}

TEST(PolyTransform, BackPropagateInverts) {
    std::mt19937_64 rng(1);
    const auto reg = ModeRegistry::polarized({"a"});
    const ModeUnitary U{reg, testutil::random_unitary(2, rng)};
    const auto p = OpPolynomial::product_of(reg, {ModeLabel::parse("a_h"), ModeLabel::parse("a_v")});
    EXPECT_TRUE(approx_equal(back_propagate(poly_transform(p, U), U), p));
}

TEST(PolyTransform, DimensionMismatchThrows) {
    const auto reg = ModeRegistry::polarized({"a"});
    const auto p = OpPolynomial::mode(reg, ModeLabel::parse("a_h"));
    EXPECT_THROW(poly_transform(p, ModeUnitary::identity(ModeRegistry::polarized({"a", "b"}))),
                 std::invalid_argument);
}

TEST(PolyCompare, ProportionalityAndPhase) {
    const auto reg = ModeRegistry::polarized({"a"});
    const auto p = bunching_product(2, 0.0, PolarizationAxis::of("a", PolBasis::hv));
    const auto q = p.scaled(std::polar(2.0, 0.7));
    const auto lambda = proportionality(q, p);
    ASSERT_TRUE(lambda.has_value());
    EXPECT_LT(std::abs(*lambda - std::polar(2.0, 0.7)), 1e-12);
    EXPECT_FALSE(equal_up_to_global_phase(q, p));
    EXPECT_TRUE(equal_up_to_global_phase(p.scaled(std::polar(1.0, 0.7)), p));
    EXPECT_FALSE(proportionality(p, OpPolynomial::mode(p.registry(), ModeLabel::parse("a_h"))));
}

TEST(Substitute, AxisPolynomialInHv) {
    // (a_r^2 - a_l^2) rewritten over a_h, a_v stays a two-photon operator
    const auto axis = PolarizationAxis::of("a", PolBasis::rl);
    const auto p = bunching_product(2, 0.0, axis);
    const auto hv = axis_polynomial_in_hv(p, "a", PolBasis::rl, ModeRegistry::polarized({"a"}));
    EXPECT_EQ(hv.degree(), 2u);
    // a_r = (a_h - i a_v)/sqrt2, a_l = (a_h + i a_v)/sqrt2 -> a_r^2 - a_l^2 = -2i a_h a_v
    EXPECT_LT(std::abs(hv.coefficient({1, 1}) - Amplitude(0.0, -2.0)), 1e-12);
    EXPECT_EQ(hv.coefficients().size(), 1u);
}

TEST(PolyText, JsonRoundTrip) {
    const auto p = poly_multiply(bunching_product(3, 0.4, PolarizationAxis::of("a", PolBasis::hv)),
                                 OpPolynomial::constant(ModeRegistry::polarized({"a"}), {0.0, 1.5}));
    const auto back = io::poly_from_json(io::to_json(p));
    EXPECT_TRUE(approx_equal(back, p, 1e-15));
}
