#include <gtest/gtest.h>

#include "kexplain/citations.hpp"
#include "kexplain/ingest.hpp"
#include "test_support.hpp"

using namespace kexplain;

namespace {

ProfileBundle gaussian() { return load_bundle(kexplain::testing::fixture("gaussian")); }

}  // namespace

TEST(ParseCitedNumber, LeadingNumber) {
  EXPECT_EQ(parse_cited_number("1.77%"), 1.77);
  EXPECT_EQ(parse_cited_number("374,514 sectors"), 374514.0);
  EXPECT_EQ(parse_cited_number("-2e3 cycles"), -2000.0);
  EXPECT_EQ(parse_cited_number(" 15.15"), 15.15);
  EXPECT_FALSE(parse_cited_number("about ten").has_value());
  EXPECT_FALSE(parse_cited_number("").has_value());
}

TEST(ValidateCitations, ExactValueOk) {
  auto f = validate_citations("[[profile:fan2 metric:dram__throughput = 1.77%]]", gaussian());
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].kind, FindingKind::ok);
  EXPECT_EQ(f[0].relative_error, 0.0);
}

TEST(ValidateCitations, PlantedMismatch) {
  auto f = validate_citations("[[profile:fan2 metric:dram__throughput = 5.0%]]", gaussian());
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].kind, FindingKind::value_mismatch);
  ASSERT_TRUE(f[0].relative_error);
  EXPECT_NEAR(*f[0].relative_error, (5.0 - 1.77) / 1.77, 1e-12);
  EXPECT_TRUE(has_value_mismatch(f));
}

TEST(ValidateCitations, ToleranceBoundary) {
  // 1% of 1.77 is 0.0177.
  auto inside = validate_citations("[[profile:fan2 metric:dram__throughput = 1.785]]", gaussian());
  auto outside = validate_citations("[[profile:fan2 metric:dram__throughput = 1.79]]", gaussian());
  EXPECT_EQ(inside[0].kind, FindingKind::ok);
  EXPECT_EQ(outside[0].kind, FindingKind::value_mismatch);
}

TEST(ValidateCitations, UnknownProfileAndMetric) {
  auto f = validate_citations(
      "[[profile:nope metric:dram__throughput = 1]] [[profile:fan2 metric:xyz = 1]]", gaussian());
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].kind, FindingKind::unknown_profile);
  EXPECT_EQ(f[1].kind, FindingKind::unknown_metric);
  EXPECT_FALSE(has_value_mismatch(f));
}

TEST(ValidateCitations, ThousandsSeparatorsAndZeroActual) {
  ProfileBundle b = gaussian();
  auto f = validate_citations("[[profile:fan2 metric:derived__memory_l2_theoretical_sectors_global_excessive = 374,514]]",
                              b);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].kind, FindingKind::ok);

  ProfileBundle z = kexplain::testing::small_bundle(1);
  z.profiles[0].metrics.push_back(kexplain::testing::num_metric("zero", 0.0));
  EXPECT_EQ(validate_citations("[[profile:p1 metric:zero = 0.005]]", z)[0].kind, FindingKind::ok);
  EXPECT_EQ(validate_citations("[[profile:p1 metric:zero = 0.5]]", z)[0].kind, FindingKind::value_mismatch);
}

TEST(ValidateCitations, UnparseableNumberIsMismatch) {
  auto f = validate_citations("[[profile:fan2 metric:dram__throughput = low]]", gaussian());
  EXPECT_EQ(f[0].kind, FindingKind::value_mismatch);
  EXPECT_FALSE(f[0].relative_error.has_value());
}

TEST(ValidateCitations, TextMetricsNotValueChecked) {
  ProfileBundle b = kexplain::testing::small_bundle(1);
  b.profiles[0].metrics.push_back(make_metric("rule", std::nullopt, "Uncoalesced"));
  EXPECT_EQ(validate_citations("[[profile:p1 metric:rule = anything]]", b)[0].kind, FindingKind::ok);
}

TEST(ValidateCitations, JsonCounts) {
  auto f = validate_citations(
      "[[profile:fan2 metric:dram__throughput = 1.77]] [[profile:fan2 metric:dram__throughput = 9]]", gaussian());
  auto j = findings_to_json(f);
  EXPECT_EQ(j["counts"]["ok"], 1);
  EXPECT_EQ(j["counts"]["value_mismatch"], 1);
  EXPECT_EQ(j["findings"].size(), 2u);
}
