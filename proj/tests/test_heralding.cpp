#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles/oracles.hpp"
#include "test_util.hpp"

using namespace noonsim;

namespace {

const double kPi = std::numbers::pi;

/// b-mode state (h, v) from oracle amplitudes c_m of |m, n-m>.
PureState b_state_from(const std::vector<std::complex<double>> &c) {
    const unsigned n = static_cast<unsigned>(c.size()) - 1;
    PureState s(ModeRegistry::polarized({"b"}));
    for (unsigned m = 0; m <= n; ++m) {
        s.add({m, n - m}, c[m]);
    }
    return s;
}

} // namespace

TEST(Detect, PmHeraldOfTwoPairs) {
    const auto s = singlet_term(2);
    const auto rotated = apply_unitary(embed_polarization(hwp(kPi / 8), "a", s.registry()), s);
    const auto h = detect(rotated, DetectionPattern::pnr({{"a_h", 1}, {"a_v", 1}}));
    EXPECT_NEAR(h.probability, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(fidelity(h.pure_conditional(), noon_state(2, kPi)), 1.0, 1e-12);
}

TEST(Detect, HongOuMandelAndWrongOccupation) {
    const auto reg = ModeRegistry::from_names({"out1", "out2"});
    const auto out = apply_unitary(embed(beamsplitter(0.5), reg.labels(), reg), PureState::basis(reg, {1, 1}));
    const auto h = detect(out, DetectionPattern::pnr({{"out1", 1}, {"out2", 1}}));
    EXPECT_LT(h.probability, 1e-12);
    EXPECT_FALSE(h.fired());

    const auto b = ModeRegistry::polarized({"b"});
    EXPECT_EQ(detect(PureState::basis(b, {2, 0}), DetectionPattern::pnr({{"b_h", 1}, {"b_v", 1}})).probability, 0.0);
}

TEST(Detect, ConditionalIsOnUnmeasuredModes) {
    const auto h = detect(singlet_term(1), DetectionPattern::pnr({{"a_h", 1}}));
    EXPECT_NEAR(h.probability, 0.5, 1e-15);
    EXPECT_EQ(h.conditional->registry().names(), (std::vector<std::string>{"a_v", "b_h", "b_v"}));
    EXPECT_NEAR(h.pure_conditional().norm_squared(), 1.0, 1e-15);
}

TEST(Detect, UnknownModeThrows) {
    EXPECT_THROW(detect(singlet_term(1), DetectionPattern::pnr({{"c_h", 1}})), RegistryError);
    EXPECT_THROW(DetectionPattern::pnr({{"a_h", 1}, {"a_h", 0}}), std::invalid_argument);
    EXPECT_THROW(DetectionPattern::pnr({}), std::invalid_argument);
}

TEST(Detect, IsProjective) {
    const auto s = singlet_term(2);
    const auto pat = DetectionPattern::pnr({{"a_h", 1}});
    const auto once = detect(s, pat);
    // re-attach the measured mode in its definite state and detect again
    const auto again = detect(tensor(PureState::basis(ModeRegistry::from_names({"a_h"}), {1}), once.pure_conditional()), pat);
    EXPECT_NEAR(again.probability, 1.0, 1e-12);
    EXPECT_NEAR(fidelity(again.pure_conditional(), once.pure_conditional()), 1.0, 1e-12);
}

TEST(Detect, ThresholdSumsOverExactCounts) {
    const auto s = singlet_term(2);
    const auto clicked = detect(s, DetectionPattern::threshold({{"a_h", 1}}));
    // a_h holds 1 or 2 photons with probability 1/3 each
    EXPECT_NEAR(clicked.probability, 2.0 / 3.0, 1e-12);
    EXPECT_EQ(clicked.conditional->size(), 2u);
    const auto dark = detect(s, DetectionPattern::threshold({{"a_h", 0}}));
    EXPECT_NEAR(dark.probability, 1.0 / 3.0, 1e-12);
}

TEST(Detect, CompletenessOverExhaustivePatterns) {
    std::mt19937_64 rng(4);
    const auto reg = ModeRegistry::polarized({"a", "b"});
    for (int i = 0; i < 5; ++i) {
        const auto s = testutil::random_state(reg, 4, rng);
        std::map<unsigned, double> by_total;
        double total = 0.0;
        for (unsigned x = 0; x <= 4; ++x) {
            for (unsigned y = 0; x + y <= 4; ++y) {
                const double p = detect(s, DetectionPattern::pnr({{"a_h", x}, {"a_v", y}})).probability;
                by_total[x + y] += p;
                total += p;
            }
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        const auto d = photon_number_distribution(s, {ModeLabel::parse("a_h"), ModeLabel::parse("a_v")});
        for (const auto &[n, p] : d) {
            EXPECT_NEAR(by_total[n], p, 1e-12);
        }
    }
}

TEST(DetectEnsemble, PureMixtureMatchesDetect) {
    const auto pat = DetectionPattern::pnr({{"a_h", 1}, {"a_v", 1}, {"b_h", 1}, {"b_v", 1}});
    const auto e = partially_distinguishable_two_pairs({1.0});
    EXPECT_NEAR(detect_ensemble(e, pat).probability, detect(singlet_term(2), pat).probability, 1e-15);
}

TEST(DetectEnsemble, DistinguishablePairsMatchEnumeration) {
    const auto e = partially_distinguishable_two_pairs({0.0});
    const auto pat = DetectionPattern::pnr({{"a_h", 1}, {"a_v", 1}, {"b_h", 1}, {"b_v", 1}});
    for (double theta : {0.0, 0.2, kPi / 8, 0.6, kPi / 4}) {
        const auto out = apply_unitary(embed_polarization(hwp(theta), "b", e.registry()), e);
        EXPECT_NEAR(detect_ensemble(out, pat).probability, oracle::distinguishable_pairs_fourfold(theta), 1e-12)
            << theta;
    }
}

TEST(DetectEnsemble, ProbabilitiesAddLinearly) {
    const auto reg = ModeRegistry::polarized({"a"});
    const Ensemble e({{0.25, PureState::basis(reg, {1, 0})}, {0.75, PureState::basis(reg, {0, 1})}});
    EXPECT_NEAR(detect_ensemble(e, DetectionPattern::pnr({{"a_h", 1}})).probability, 0.25, 1e-15);
    EXPECT_NEAR(detect_ensemble(e, DetectionPattern::pnr({{"a_v", 1}})).probability, 0.75, 1e-15);
}

TEST(Noon2, PmAndRlSigns) {
    const auto pm = herald_noon2(singlet_term(2), PolBasis::pm);
    EXPECT_NEAR(pm.probability, 1.0 / 3.0, 1e-10);
    EXPECT_NEAR(fidelity(pm.pure_conditional(), noon_state(2, kPi)), 1.0, 1e-10);
    const auto rl = herald_noon2(singlet_term(2), PolBasis::rl);
    EXPECT_NEAR(rl.probability, 1.0 / 3.0, 1e-10);
    EXPECT_NEAR(fidelity(rl.pure_conditional(), noon_state(2, 0.0)), 1.0, 1e-10);
    EXPECT_NEAR(fidelity(rl.pure_conditional(), noon_state(2, kPi)), 0.0, 1e-10);
}

TEST(Noon2, SinglePairNeverFires) {
    for (PolBasis b : {PolBasis::pm, PolBasis::rl}) {
        const auto h = herald_noon2(singlet_term(1), b);
        EXPECT_EQ(h.probability, 0.0);
        EXPECT_FALSE(h.fired());
        EXPECT_THROW(h.pure_conditional(), ZeroStateError);
    }
}

TEST(Noon2, InterferometerCircuitIsEquivalent) {
    // The splitter outputs x, y give x y = i (a_h^2 + a_v^2) / 2 on the input.
    const auto h = run_scheme(noon2_interferometer_scheme(), singlet_term(2));
    EXPECT_NEAR(h.probability, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(fidelity(h.pure_conditional(), noon_state(2, 0.0)), 1.0, 1e-12);
}

TEST(Noon2, MixtureHeraldIsEnsemble) {
    const auto h = herald_noon2(partially_distinguishable_two_pairs({0.5}), PolBasis::pm);
    ASSERT_TRUE(h.fired());
    double total = 0.0;
    for (const auto &c : h.conditional->components()) {
        total += c.weight;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Noon4, LiteralCircuit) {
    const auto h = herald_noon4(singlet_term(4));
    EXPECT_NEAR(h.probability, 3.0 / 80.0, 1e-10);
    EXPECT_NEAR(fidelity(h.pure_conditional(), noon_state(4, kPi)), 1.0, 1e-10);
    EXPECT_EQ(herald_noon4(singlet_term(2)).probability, 0.0);
}

TEST(Noon4, MatchesPermanentOracle) {
    const auto o = oracle::singlet_herald(4, oracle::noon4_network(), {1, 1, 1, 1});
    EXPECT_NEAR(o.probability, 3.0 / 80.0, 1e-12);
    const auto h = herald_noon4(singlet_term(4));
    EXPECT_NEAR(h.probability, o.probability, 1e-12);
    EXPECT_NEAR(fidelity(h.pure_conditional(), normalize(b_state_from(o.b_amplitudes))), 1.0, 1e-12);
}

TEST(Noon4, OperatorRouteAgreesWithCircuit) {
    const auto scheme = noon4_scheme();
    const auto prepared = prepare_input(scheme, singlet_term(4));
    const auto op = scheme_operator(scheme, prepared.registry());
    const auto unnormalized = poly_apply(op, prepared);
    EXPECT_NEAR(unnormalized.norm_squared(), herald_noon4(singlet_term(4)).probability, 1e-10);

    // on the input path the operator is a_h^4 - a_v^4 with the 6/16 splitting factor
    const auto on_a1 = restrict_to(op, {ModeLabel::parse("a1_h"), ModeLabel::parse("a1_v")});
    const ModeRegistry a1 = ModeRegistry::polarized({"a1"});
    OpPolynomial local(a1);
    for (const auto &[e, c] : on_a1.coefficients()) {
        const auto ih = prepared.registry().index_of(ModeLabel::parse("a1_h"));
        const auto iv = prepared.registry().index_of(ModeLabel::parse("a1_v"));
        local.add({e[ih], e[iv]}, c);
    }
    const auto target = bunching_product(4, 0.0, PolarizationAxis::of("a1", PolBasis::hv));
    const auto lambda = proportionality(local, target);
    ASSERT_TRUE(lambda.has_value());
    // a_h^4 - a_v^4 on psi_4^- has squared norm 2 * 4! / 5, so |lambda|^2 * 48/5 = 3/80
    EXPECT_NEAR(std::norm(*lambda) * 48.0 / 5.0, 3.0 / 80.0, 1e-12);

    // the 6/16 factor: the balanced splitter alone sends two of four photons to each port
    Circuit splitter;
    splitter.elements.push_back(scheme.circuit.elements.front());
    const auto four_h = prepare_input(scheme, PureState::basis(singlet_term(4).registry(), {4, 0, 0, 0}));
    const auto split = detect(apply_circuit(splitter, four_h), DetectionPattern::pnr({{"a1_h", 2}, {"a2_h", 2}}));
    EXPECT_NEAR(split.probability, 6.0 / 16.0, 1e-12);
}

TEST(Noon8, ConditionalIsRlNoonState) {
    const auto h = herald_noon8(singlet_term(8));
    EXPECT_NEAR(fidelity(h.pure_conditional(), noon_state(8, kPi, PolBasis::rl)), 1.0, 1e-8);
    EXPECT_EQ(herald_noon8(singlet_term(4)).probability, 0.0);
}

TEST(Noon8, ProbabilityMatchesPermanentOracle) {
    const auto o = oracle::singlet_herald(8, oracle::noon8_network(), std::vector<unsigned>(8, 1));
    const auto h = herald_noon8(singlet_term(8));
    EXPECT_NEAR(h.probability, o.probability, 1e-12);
    EXPECT_NEAR(fidelity(h.pure_conditional(), normalize(b_state_from(o.b_amplitudes))), 1.0, 1e-10);
}

TEST(Noon8, OperatorHasTwoMonomialsInRl) {
    const auto scheme = noon8_scheme();
    const auto prepared = prepare_input(scheme, singlet_term(8));
    const auto op = restrict_to(scheme_operator(scheme, prepared.registry()),
                                {ModeLabel::parse("a1_h"), ModeLabel::parse("a1_v")});
    const auto ih = prepared.registry().index_of(ModeLabel::parse("a1_h"));
    const auto iv = prepared.registry().index_of(ModeLabel::parse("a1_v"));
    OpPolynomial local(ModeRegistry::polarized({"a1"}));
    for (const auto &[e, c] : op.coefficients()) {
        local.add({e[ih], e[iv]}, c);
    }
    const auto target = axis_polynomial_in_hv(bunching_product(8, 0.0, PolarizationAxis::of("a1", PolBasis::rl)),
                                              "a1", PolBasis::rl, local.registry());
    EXPECT_TRUE(proportionality(local, target, 1e-12).has_value());
    // a rival with the same degree but three rl monomials is rejected
    const auto axis = PolarizationAxis::of("a1", PolBasis::rl);
    const auto squared = poly_power(bunching_product(4, 0.0, axis), 2);
    EXPECT_EQ(squared.coefficients().size(), 3u);
    EXPECT_FALSE(proportionality(local, axis_polynomial_in_hv(squared, "a1", PolBasis::rl, local.registry()), 1e-12));
}

TEST(AnyBasis, RandomAnalyzersBunchInComplementaryBases) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 12; ++i) {
        const auto c = any_basis_herald(random_polarization_unitary(rng));
        EXPECT_NEAR(c.herald_probability, 1.0 / 3.0, 1e-10);
        EXPECT_LT(c.complementary_coincidence[0], 1e-10);
        EXPECT_LT(c.complementary_coincidence[1], 1e-10);
        EXPECT_NEAR(c.same_basis_coincidence, 1.0, 1e-10);
    }
}

TEST(Fidelity, Examples) {
    const auto s = noon_state(2, 0.0);
    EXPECT_NEAR(fidelity(s, s), 1.0, 1e-15);
    EXPECT_NEAR(fidelity(s, noon_state(2, kPi)), 0.0, 1e-15);
    const auto reg = ModeRegistry::polarized({"b"});
    EXPECT_NEAR(fidelity(PureState::basis(reg, {1, 0}), PureState::basis(reg, {0, 1})), 0.0, 1e-15);
    EXPECT_THROW(fidelity(s, singlet_term(1)), RegistryError);
}
