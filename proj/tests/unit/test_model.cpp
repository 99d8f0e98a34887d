#include <gtest/gtest.h>

#include "advht/model.hpp"
#include "test_support.hpp"

using namespace advht;
using advht::testing::indicator_instance;

TEST(Model, LoadsIndicatorInstance) {
  const auto inst = indicator_instance();
  ASSERT_EQ(inst.num_letters(), 3u);
  ASSERT_EQ(inst.p0.num_vertices(), 2u);
  ASSERT_EQ(inst.p1.num_vertices(), 1u);
  EXPECT_DOUBLE_EQ(inst.p0.vertex(0)[1], 0.25);
  EXPECT_DOUBLE_EQ(inst.p0.vertex(1)[0], 0.5);
  EXPECT_DOUBLE_EQ(inst.p1.vertex(0)[2], 1.0 / 3.0);
  EXPECT_EQ(inst.alphabet[2], "c");
}

TEST(Model, RejectsVertexNotSummingToOne) {
  const auto doc = nlohmann::json::parse(R"({"alphabet":["a","b"],"P0":{"vertices":[[0.4,0.4]]},
                                              "P1":{"vertices":[[0.5,0.5]]}})");
  EXPECT_THROW(parse_instance(doc), ValidationError);
}

TEST(Model, IdenticalHypothesesAreWellFormed) {
  const auto doc = nlohmann::json::parse(R"({"alphabet":["a","b"],"P0":{"vertices":[[0.5,0.5]]},
                                              "P1":{"vertices":[[0.5,0.5]]}})");
  const auto inst = parse_instance(doc);
  EXPECT_EQ(inst.p0.vertex(0), inst.p1.vertex(0));
}

TEST(Model, MalformedDocumentsAreParseErrors) {
  EXPECT_THROW(parse_instance(nlohmann::json::parse(R"({"P0":{"vertices":[]}})")), ParseError);
  EXPECT_THROW(parse_instance(nlohmann::json::parse(R"({"alphabet":["a","b"],"P0":[1],"P1":{"vertices":[[1]]}})")),
               ParseError);
  EXPECT_THROW(load_instance("/nonexistent/instance.json"), ParseError);
}

TEST(Model, NegativeProbabilityRejected) {
  EXPECT_THROW(Distribution({1.2, -0.2}), ValidationError);
}

TEST(Model, RationalStringsAreExact) {
  EXPECT_EQ(parse_probability("4/15"), 4.0 / 15.0);
  EXPECT_EQ(parse_probability("9/50"), 9.0 / 50.0);
  EXPECT_EQ(parse_probability(0.25), 0.25);
  EXPECT_EQ(parse_probability("0.125"), 0.125);
  EXPECT_THROW(parse_probability("1/0"), ParseError);
  EXPECT_THROW(parse_probability("abc"), ParseError);
}

TEST(Model, InstanceJsonRoundTrip) {
  const auto inst = indicator_instance();
  const auto again = parse_instance(instance_to_json(inst));
  ASSERT_EQ(again.p0.num_vertices(), inst.p0.num_vertices());
  for (std::size_t v = 0; v < inst.p0.num_vertices(); ++v) EXPECT_EQ(again.p0.vertex(v), inst.p0.vertex(v));
  EXPECT_EQ(again.p1.vertex(0), inst.p1.vertex(0));
}

TEST(Model, NormalizeWeightPair) {
  const auto a = normalize_weight_pair(WeightPair({1.0 / 3, 1.0, 0.0}, {0.0, 0.0, 1.0}));
  EXPECT_NEAR(a.f_plus()[0], 0.25, 1e-15);
  EXPECT_NEAR(a.f_plus()[1], 0.75, 1e-15);
  EXPECT_EQ(a.f_minus()[2], 1.0);

  const auto b = normalize_weight_pair(WeightPair({1.0, 0.0}, {0.0, 1.0}));
  EXPECT_EQ(b.f_plus()[0], 1.0);
  EXPECT_EQ(b.f_minus()[1], 1.0);

  const auto c = normalize_weight_pair(WeightPair({0.2, 0.2}, {0.0, 0.4}));
  EXPECT_NEAR(c.f_plus()[0], 0.5, 1e-15);
  EXPECT_NEAR(c.f_plus()[1], 0.5, 1e-15);
  EXPECT_NEAR(c.f_minus()[1], 1.0, 1e-15);
}

TEST(Model, WeightPairBoundEnforced) {
  EXPECT_THROW(WeightPair({0.7, 0.0}, {0.5, 0.0}), ValidationError);
  EXPECT_THROW(WeightPair({-0.1, 0.0}, {0.0, 0.0}), ValidationError);
}

TEST(Model, Expectation) {
  const std::vector<double> f{1.0 / 3, 1.0, 0.0};
  EXPECT_NEAR(expectation(f, Distribution::uniform(3)), 4.0 / 9.0, 1e-15);
  const std::vector<double> ones{1.0, 1.0, 1.0};
  EXPECT_NEAR(expectation(ones, Distribution({0.2, 0.3, 0.5})), 1.0, 1e-15);
  const std::vector<double> c{0.0, 0.0, 1.0};
  EXPECT_EQ(expectation(c, Distribution({0.0, 0.25, 0.75})), 0.75);
}

TEST(Model, FlooredWeights) {
  const WeightPair w({0.0, 1.0}, {1.0, 0.0});
  const auto f = w.floored(0.1);
  EXPECT_NEAR(f.f_plus()[0], 0.1, 1e-15);
  EXPECT_NEAR(f.f_plus()[1], 0.9, 1e-15);
}

TEST(Model, ParseDistributionList) {
  const auto d = parse_distribution_list("1/4, 3/4");
  EXPECT_EQ(d[0], 0.25);
  EXPECT_EQ(d[1], 0.75);
  const auto e = parse_distribution_list("[\"1/3\", \"2/3\"]");
  EXPECT_EQ(e[1], 2.0 / 3.0);
}
