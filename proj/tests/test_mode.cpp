#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace noonsim;

TEST(ModeLabel, ParsesSpatialPolarizationAndTag) {
    const auto l = ModeLabel::parse("a_h_I");
    EXPECT_EQ(l.spatial, "a");
    EXPECT_EQ(l.pol, Polarization::h);
    EXPECT_EQ(l.tag, "I");
    EXPECT_EQ(l.name(), "a_h_I");
    EXPECT_EQ(ModeLabel::parse("a1").pol, Polarization::none);
    EXPECT_EQ(ModeLabel::parse("b_r").pol, Polarization::r);
    EXPECT_EQ(ModeLabel::parse("c_x").tag, "x");
    EXPECT_THROW(ModeLabel::parse(""), RegistryError);
    EXPECT_THROW(ModeLabel::parse("_h"), RegistryError);
}

TEST(ModeLabel, UntaggedLabelCoversTaggedCopies) {
    const auto base = ModeLabel::parse("a_h");
    EXPECT_TRUE(base.covers(ModeLabel::parse("a_h_I")));
    EXPECT_TRUE(base.covers(base));
    EXPECT_FALSE(base.covers(ModeLabel::parse("a_v_I")));
    EXPECT_FALSE(ModeLabel::parse("a_h_I").covers(ModeLabel::parse("a_h_II")));
}

TEST(ModeRegistry, SortedUniqueAndIndexed) {
    const auto reg = ModeRegistry::from_names({"b_v", "a_h", "b_h", "a_v"});
    EXPECT_EQ(reg.names(), (std::vector<std::string>{"a_h", "a_v", "b_h", "b_v"}));
    EXPECT_EQ(reg.index_of(ModeLabel::parse("b_h")), 2u);
    EXPECT_THROW(reg.index_of(ModeLabel::parse("c_h")), RegistryError);
    EXPECT_THROW(ModeRegistry::from_names({"a_h", "a_h"}), RegistryError);
}

TEST(ModeRegistry, InternalLabelsSortLast) {
    const auto reg = ModeRegistry::from_names({"a_h_II", "a_v_I", "a_h_I", "a_h"});
    EXPECT_EQ(reg.names(), (std::vector<std::string>{"a_h", "a_h_I", "a_h_II", "a_v_I"}));
    EXPECT_EQ(reg.covered_by(ModeLabel::parse("a_h")).size(), 3u);
    EXPECT_EQ(reg.tags(), (std::vector<std::string>{"", "I", "II"}));
}

TEST(ModeRegistry, PolarizedHelper) {
    const auto reg = ModeRegistry::polarized({"a", "b"});
    EXPECT_EQ(reg.size(), 4u);
    EXPECT_TRUE(reg.has_spatial("b"));
    EXPECT_FALSE(reg.has_spatial("c"));
}

TEST(PolBasis, ParsesAndNamesAxes) {
    PolBasis b;
    ASSERT_TRUE(parse_basis("rl", b));
    EXPECT_EQ(b, PolBasis::rl);
    EXPECT_FALSE(parse_basis("xy", b));
    EXPECT_EQ(basis_polarizations(PolBasis::pm).first, Polarization::p);
    EXPECT_EQ(basis_polarizations(PolBasis::pm).second, Polarization::m);
}
