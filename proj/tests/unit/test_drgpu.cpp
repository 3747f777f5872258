#include <gtest/gtest.h>

#include "kexplain/drgpu.hpp"
#include "test_support.hpp"

using namespace kexplain;
using namespace kexplain::drgpu;
using nlohmann::json;

TEST(Textify, SingleRootOneParagraph) {
  std::string text = textify(json{{"label", "all stall cycles"}, {"stall_fraction", 1.0}});
  EXPECT_EQ(text, "DrGPU stall analysis\n\n- all stall cycles: 100.0% of stall cycles\n");
}

TEST(Textify, LeavesInDescendingStallOrder) {
  json tree = {{"label", "root"},
               {"stall_fraction", 1.0},
               {"children",
                {{{"label", "memory"}, {"stall_fraction", 0.4}},
                 {{"label", "barrier"}, {"stall_fraction", 0.6}, {"suggestions", {"remove barriers"}}}}}};
  const std::string expected =
      "DrGPU stall analysis\n\n"
      "- root: 100.0% of stall cycles\n"
      "  - barrier: 60.0% of stall cycles\n"
      "    * Suggestion: remove barriers\n"
      "  - memory: 40.0% of stall cycles\n";
  EXPECT_EQ(textify(tree), expected);
}

TEST(Textify, EqualFractionsOrderedByLabel) {
  json tree = {{"label", "r"},
               {"stall_fraction", 1.0},
               {"children", {{{"label", "b"}, {"stall_fraction", 0.5}}, {{"label", "a"}, {"stall_fraction", 0.5}}}}};
  std::string text = textify(tree);
  EXPECT_LT(text.find("- a:"), text.find("- b:"));
}

TEST(ParseTree, MissingLabelIsSchemaError) {
  EXPECT_THROW(parse_tree(json{{"stall_fraction", 0.5}}), TreeSchema);
  EXPECT_THROW(parse_tree(json{{"label", "x"}, {"stall_fraction", 1.5}}), TreeSchema);
  EXPECT_THROW(parse_tree(json{{"label", "x"}, {"stall_fraction", 0.5}, {"children", {{{"stall_fraction", 0.1}}}}}),
               TreeSchema);
}

#ifdef KEXPLAIN_DRGPU_STUB
TEST(Adapter, StubProducesStallTree) {
  KernelProfile p;
  p.id = "p";
  p.metrics = {kexplain::testing::num_metric("smsp__stall_barrier", 30.0),
               kexplain::testing::num_metric("smsp__stall_long_scoreboard", 10.0),
               kexplain::testing::num_metric("dram__throughput", 2.0)};
  AdapterConfig cfg;
  cfg.command = KEXPLAIN_DRGPU_STUB;
  StallNode root = run_adapter(cfg, p);
  ASSERT_EQ(root.children.size(), 2u);
  double total = 0;
  for (const auto& c : root.children) total += c.stall_fraction;
  EXPECT_NEAR(total, 1.0, 1e-12);
  std::string text = textify(root);
  EXPECT_LT(text.find("barrier"), text.find("long_scoreboard"));
}

TEST(Adapter, NonzeroExitIsAdapterFailure) {
  KernelProfile p;
  p.id = "p";
  AdapterConfig cfg;
  cfg.command = KEXPLAIN_DRGPU_STUB;
  cfg.args = {"{metrics_csv}", "--fail"};
  EXPECT_THROW(run_adapter(cfg, p), AdapterFailure);
}
#endif

TEST(Adapter, UnconfiguredIsAdapterFailure) {
  KernelProfile p;
  EXPECT_THROW(run_adapter(AdapterConfig{}, p), AdapterFailure);
}
