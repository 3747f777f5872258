#include <gtest/gtest.h>

#include <random>

#include "kexplain/csv.hpp"
#include "kexplain/ingest.hpp"
#include "kexplain/process.hpp"
#include "test_support.hpp"

using namespace kexplain;
using kexplain::testing::fixture;
namespace fs = std::filesystem;

TEST(MetricsCsv, ParsesListingValue) {
  auto m = parse_metrics_csv("metric,unit,value\ndram__throughput,%,1.77\n");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].name, "dram__throughput");
  EXPECT_EQ(m[0].kind, MetricKind::percent);
  EXPECT_EQ(m[0].unit, "%");
  EXPECT_DOUBLE_EQ(m[0].number(), 1.77);
}

TEST(MetricsCsv, EmptyDataSection) { EXPECT_TRUE(parse_metrics_csv("metric,unit,value\n").empty()); }

TEST(MetricsCsv, DuplicateMetricRejected) {
  EXPECT_THROW(parse_metrics_csv("metric,unit,value\na,,1\na,,2\n"), DuplicateMetric);
}

TEST(MetricsCsv, QuotedThousandsAndTextValues) {
  auto m = parse_metrics_csv("metric,unit,value\nsectors,sector,\"374,514\"\nmsg,,\"uses \"\"shared\"\" memory\"\n");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_DOUBLE_EQ(m[0].number(), 374514.0);
  EXPECT_EQ(std::get<std::string>(m[1].value), "uses \"shared\" memory");
}

TEST(MetricsCsv, SyntaxErrorCarriesLine) {
  try {
    parse_metrics_csv("metric,unit,value\na,,1\nb,,\"open\n");
    FAIL() << "expected CsvSyntax";
  } catch (const CsvSyntax& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(MetricsCsv, RoundTripProperty) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> pieces = {"a", "b,c", "q\"t", "sm__x", " pad ", "é", "n/a", "line\nbreak"};
  const std::vector<std::optional<std::string>> units = {std::nullopt, "%", "byte", "cycles, avg"};
  for (int round = 0; round < 200; ++round) {
    std::vector<MetricValue> metrics;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      std::string name = "m" + std::to_string(i) + pieces[rng() % pieces.size()];
      std::string raw;
      switch (rng() % 3) {
        case 0: raw = std::to_string(static_cast<double>(rng() % 100000) / 8.0); break;
        case 1: raw = pieces[rng() % pieces.size()]; break;
        default: raw = std::to_string(rng() % 1000); break;
      }
      metrics.push_back(make_metric(name, units[rng() % units.size()], raw));
    }
    EXPECT_EQ(parse_metrics_csv(serialize_metrics_csv(metrics)), metrics) << serialize_metrics_csv(metrics);
  }
}

TEST(LineCsv, GroupsRowsByFileAndLine) {
  auto r = parse_line_csv("file,line,metric,value\nk.cu,10,stall,1\nk.cu,10,inst,2\nk.cu,12,stall,3\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].line, 10);
  EXPECT_EQ(r[0].metrics.size(), 2u);
  EXPECT_EQ(r[1].line, 12);
  EXPECT_DOUBLE_EQ(r[1].metrics.at("stall"), 3.0);
}

TEST(LineCsv, ZeroLineRejected) {
  EXPECT_THROW(parse_line_csv("file,line,metric,value\nk.cu,0,stall,1\n"), NonPositiveLine);
}

TEST(LineCsv, EmptyInput) { EXPECT_TRUE(parse_line_csv("").empty()); }

TEST(LineCsv, RoundTrip) {
  auto r = parse_line_csv("file,line,metric,value\nk.cu,10,stall,1.5\nk.cu,12,stall,3\n");
  EXPECT_EQ(parse_line_csv(serialize_line_csv(r)), r);
}

TEST(CsvReader, CrlfAndEmbeddedNewlines) {
  auto recs = csv::parse("a,b\r\n\"x\ny\",z\r\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].fields[0], "x\ny");
  EXPECT_EQ(recs[1].line, 2);
  EXPECT_THROW(csv::parse("a,b\"c\n"), CsvSyntax);
}

TEST(LoadBundle, GaussianFixture) {
  ProfileBundle b = load_bundle(fixture("gaussian"));
  EXPECT_EQ(b.profiles.size(), 1u);
  EXPECT_EQ(b.sources.size(), 1u);
  EXPECT_EQ(b.manifest.kernel_name, "Fan2");
  EXPECT_TRUE(validate_bundle(b).empty());
  const MetricValue* dram = b.profiles[0].find_metric("dram__throughput");
  ASSERT_NE(dram, nullptr);
  EXPECT_DOUBLE_EQ(dram->number(), 1.77);
}

TEST(LoadBundle, Xsbench75Profiles) {
  ProfileBundle b = load_bundle(fixture("xsbench-75"));
  EXPECT_EQ(b.profiles.size(), 75u);
  std::vector<std::string> names;
  for (const auto& k : b.manifest.knobs) names.push_back(k.name);
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"block_size", "grid_type", "max_registers"}));
  auto ids = b.profile_ids();
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  EXPECT_TRUE(validate_bundle(b).empty());
}

TEST(LoadBundle, MissingManifest) {
  TempDir tmp;
  EXPECT_THROW(load_bundle(tmp.path()), MissingManifest);
}

TEST(LoadBundle, DeterministicAndMatchesJsonForm) {
  ProfileBundle a = load_bundle(fixture("gaussian"));
  ProfileBundle b = load_bundle(fixture("gaussian"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(parse_bundle_json(serialize_bundle_json(a)), a);
  EXPECT_EQ(load_bundle(fixture("gaussian_bundle.json")), a);
}

TEST(LoadBundle, WriteThenLoadRoundTrip) {
  ProfileBundle b = kexplain::testing::small_bundle(3, 2);
  b.profiles[1].line_records = std::vector<LineRecord>{{"src/f1.cu", 1, {{"stall", 2.0}}, false}};
  TempDir tmp;
  write_bundle_dir(b, tmp.path() / "b");
  ProfileBundle back = load_bundle(tmp.path() / "b");
  EXPECT_EQ(back.profile_ids(), b.profile_ids());
  EXPECT_EQ(back.sources, b.sources);
  EXPECT_EQ(back.profiles[1].line_records, b.profiles[1].line_records);
  EXPECT_EQ(serialize_bundle_json(back), serialize_bundle_json(b));
}

TEST(BundleJson, MinimalValidBundle) {
  auto b = parse_bundle_json(R"({"app_name":"a","kernel_name":"k","knobs":[],"defaults":{},
    "profiles":[{"id":"p","gpu_arch":"sm_90","metrics":[{"name":"x","unit":null,"value":1}]}],
    "sources":[{"path":"k.cu","content":"int x;\n"}]})");
  EXPECT_EQ(b.profiles.size(), 1u);
  EXPECT_EQ(b.profiles[0].config.gpu_arch, "sm_90");
}

TEST(BundleJson, UndeclaredKnobIsSchemaViolation) {
  EXPECT_THROW(parse_bundle_json(R"({"app_name":"a","kernel_name":"k","knobs":[],"defaults":{},
    "profiles":[{"id":"p","gpu_arch":"sm_90","knobs":{"tile":4},"metrics":[]}],"sources":[]})"),
               SchemaViolation);
}

TEST(BundleJson, SyntaxError) { EXPECT_THROW(parse_bundle_json("{"), JsonSyntax); }

TEST(BundleJson, RoundTripIdentity) {
  ProfileBundle b = kexplain::testing::small_bundle(2);
  b.profiles[0].metrics.push_back(make_metric("rule", std::nullopt, "text value"));
  b.guidelines = "custom guidelines";
  EXPECT_EQ(parse_bundle_json(serialize_bundle_json(b)), b);
}

TEST(SubsetProfiles, KeepsBundleOrder) {
  ProfileBundle b = kexplain::testing::small_bundle(4);
  EXPECT_EQ(subset_profiles(b, {"p3", "p1"}).profile_ids(), (std::vector<std::string>{"p1", "p3"}));
}
