#include <gtest/gtest.h>

#include "kexplain/model.hpp"
#include "test_support.hpp"

using namespace kexplain;
using kexplain::testing::small_bundle;

TEST(ValidateBundle, WellFormedTwoProfileBundleHasNoViolations) {
  EXPECT_TRUE(validate_bundle(small_bundle(2)).empty());
}

TEST(ValidateBundle, DuplicateProfileIdNamedOnce) {
  ProfileBundle b = small_bundle(2);
  b.profiles[1].id = "p1";
  b.profiles[1].config.profile_id = "p1";
  auto v = validate_bundle(b);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("p1"), std::string::npos);
}

TEST(ValidateBundle, IsPure) {
  ProfileBundle b = small_bundle(3);
  b.profiles[2].id = "p1";
  EXPECT_EQ(validate_bundle(b), validate_bundle(b));
}

TEST(ValidateBundle, UndeclaredKnobIsAViolation) {
  ProfileBundle b = small_bundle(1);
  b.profiles[0].config.knobs["tile"] = 4.0;
  EXPECT_FALSE(validate_bundle(b).empty());
}

TEST(ValidateBundle, NonPositiveLineIsAViolation) {
  ProfileBundle b = small_bundle(1);
  b.profiles[0].line_records = std::vector<LineRecord>{{"src/f1.cu", 0, {{"stall", 1.0}}, false}};
  EXPECT_FALSE(validate_bundle(b).empty());
}

TEST(ProfilerNumber, StripsThousandsSeparators) {
  EXPECT_EQ(parse_profiler_number("374,514"), 374514.0);
  EXPECT_EQ(parse_profiler_number("1.77"), 1.77);
  EXPECT_FALSE(parse_profiler_number("n/a").has_value());
  EXPECT_FALSE(parse_profiler_number("").has_value());
  EXPECT_FALSE(parse_profiler_number("12 warps").has_value());
}

TEST(MakeMetric, PercentKindAndAdvisoryRangeFlag) {
  MetricValue m = make_metric("dram__throughput", "%", "1.77");
  EXPECT_EQ(m.kind, MetricKind::percent);
  EXPECT_TRUE(m.is_numeric());
  EXPECT_DOUBLE_EQ(m.number(), 1.77);
  EXPECT_FALSE(m.unchecked);

  MetricValue burst = make_metric("l1tex__throughput", "%", "104.2");
  EXPECT_TRUE(burst.unchecked);
  EXPECT_DOUBLE_EQ(burst.number(), 104.2);
}

TEST(MakeMetric, TextValuesAreKeptVerbatim) {
  MetricValue m = make_metric("rule", std::nullopt, "Uncoalesced global access");
  EXPECT_EQ(m.kind, MetricKind::text);
  EXPECT_FALSE(m.is_numeric());
  EXPECT_EQ(m.value_text(), "Uncoalesced global access");
}

TEST(SourceFile, SlocSkipsBlankAndCommentLines) {
  SourceFile f{"a.cu", "// header\n\nint a;\n  /* block */\nint b; // trailing\n"};
  EXPECT_EQ(f.sloc(), 2u);
}
