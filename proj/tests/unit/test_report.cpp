#include <gtest/gtest.h>

#include "kexplain/report.hpp"

using namespace kexplain;

namespace {

ExplanationReport sample() {
  ExplanationReport r;
  r.summary_section = "Latency bound.";
  r.bottleneck_sections = {"Uncoalesced loads.", "Low occupancy."};
  r.suggestions = {{"Swap indices", "Coalesces loads.", {{"src/k.cu", 12, 16}}}};
  r.citations = {{"fan2", "dram__throughput", "1.77%", true}};
  r.provenance = {1, 2};
  r.warnings = {"PassCapExceeded: analyzed 1 of 2 profiles"};
  return r;
}

}  // namespace

TEST(ReportMarkdown, SectionsInOrder) {
  BundleManifest m;
  m.app_name = "gaussian";
  m.kernel_name = "Fan2";
  std::string md = render_report_markdown(sample(), m);
  std::vector<std::string> order = {"# Performance explanation: Fan2 (gaussian)", "> **Warning:** PassCapExceeded",
                                    "## Summary", "## Bottlenecks", "### Bottleneck 1", "### Bottleneck 2",
                                    "## Suggestions", "`src/k.cu:12-16`", "## Citations",
                                    "[[profile:fan2 metric:dram__throughput = 1.77%]]", "## Provenance",
                                    "Aggregated from analysis passes 1, 2."};
  std::size_t pos = 0;
  for (const auto& s : order) {
    std::size_t at = md.find(s, pos);
    ASSERT_NE(at, std::string::npos) << s << "\n" << md;
    pos = at;
  }
  EXPECT_EQ(md.find("## Tuning knobs"), std::string::npos);
  EXPECT_TRUE(report_has_suggestions(md));
}

TEST(ReportMarkdown, Deterministic) {
  BundleManifest m;
  EXPECT_EQ(render_report_markdown(sample(), m), render_report_markdown(sample(), m));
}

TEST(ReportMarkdown, NoSuggestionsDetected) {
  ExplanationReport r = sample();
  r.suggestions.clear();
  EXPECT_FALSE(report_has_suggestions(render_report_markdown(r, {})));
  EXPECT_FALSE(report_has_suggestions("plain notes without headings"));
}

TEST(ReviewMarkdown, VerdictPerHypothesis) {
  HypothesisSet hs = {{"H1", "uncoalesced", {}, HypothesisStatus::confirmed},
                      {"H2", "compute bound", {}, HypothesisStatus::refuted}};
  ReviewReport rv{{{"H1", HypothesisStatus::confirmed, "bytes per sector"},
                   {"H2", HypothesisStatus::refuted, "idle pipes"}}};
  std::string md = render_review_markdown(rv, hs);
  EXPECT_NE(md.find("## H1: uncoalesced"), std::string::npos);
  EXPECT_NE(md.find("**Verdict:** refuted"), std::string::npos);
}
