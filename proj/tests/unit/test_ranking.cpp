#include <gtest/gtest.h>

#include "kexplain/ingest.hpp"
#include "kexplain/ranking.hpp"
#include "test_support.hpp"

using namespace kexplain;

namespace {

ProfileBundle xs_bundle(const std::vector<std::tuple<std::string, std::string, double, double>>& rows) {
  ProfileBundle b;
  b.manifest.app_name = "XSBench";
  b.manifest.kernel_name = "xs";
  b.manifest.knobs = {{"grid_type", KnobType::categorical, std::nullopt},
                      {"block_size", KnobType::numeric, "threads"},
                      {"max_registers", KnobType::numeric, std::nullopt}};
  b.manifest.defaults = {{"grid_type", std::string("unionized")},
                         {"block_size", 128.0},
                         {"max_registers", 64.0},
                         {kGpuArchKey, std::string("sm_90")}};
  for (const auto& [id, grid, block, regs] : rows) {
    KernelProfile p;
    p.id = id;
    p.config.profile_id = id;
    p.config.gpu_arch = "sm_90";
    p.config.knobs = {{"grid_type", grid}, {"block_size", block}, {"max_registers", regs}};
    b.profiles.push_back(p);
  }
  return b;
}

}  // namespace

TEST(Ranking, ExactDefaultsRankFirstAtZero) {
  auto r = rank_profiles_by_default_distance(
      xs_bundle({{"b", "hash", 32, 64}, {"a", "unionized", 128, 64}, {"c", "unionized", 1024, 64}}));
  EXPECT_EQ(r[0].profile_id, "a");
  EXPECT_EQ(r[0].distance, 0.0);
}

TEST(Ranking, CategoricalVersusRangeNormalizedNumeric) {
  auto r = rank_profiles_by_default_distance(xs_bundle({{"hash-128", "hash", 128, 64},
                                                        {"union-256", "unionized", 256, 64},
                                                        {"union-32", "unionized", 32, 64},
                                                        {"union-1024", "unionized", 1024, 64}}));
  std::map<std::string, double> d;
  for (const auto& x : r) d[x.profile_id] = x.distance;
  EXPECT_DOUBLE_EQ(d["hash-128"], 1.0);
  EXPECT_DOUBLE_EQ(d["union-256"], 128.0 / 992.0);
  EXPECT_EQ(ranked_ids(r), (std::vector<std::string>{"union-32", "union-256", "union-1024", "hash-128"}));
}

TEST(Ranking, TiesBreakLexicographically) {
  auto r = rank_profiles_by_default_distance(xs_bundle({{"b", "unionized", 64, 64}, {"a", "unionized", 192, 64}}));
  EXPECT_DOUBLE_EQ(r[0].distance, r[1].distance);
  EXPECT_EQ(r[0].profile_id, "a");
}

TEST(Ranking, MissingKnobUsesDefaultAndContributionsSum) {
  ProfileBundle b = xs_bundle({{"a", "hash", 32, 48}, {"b", "unionized", 1024, 128}});
  b.profiles[1].config.knobs.erase("max_registers");
  auto r = rank_profiles_by_default_distance(b);
  for (const auto& x : r) {
    double sum = 0;
    for (const auto& [k, v] : x.contributions) sum += v;
    EXPECT_DOUBLE_EQ(sum, x.distance);
  }
}

TEST(Ranking, GpuArchIsCategorical) {
  ProfileBundle b = xs_bundle({{"a", "unionized", 128, 64}, {"b", "unionized", 128, 64}});
  b.profiles[0].config.gpu_arch = "sm_70";
  auto r = rank_profiles_by_default_distance(b);
  EXPECT_EQ(r[0].profile_id, "b");
  EXPECT_DOUBLE_EQ(r[1].distance, 1.0);
}

TEST(Ranking, MissingDefaultForKnobThrows) {
  ProfileBundle b = xs_bundle({{"a", "unionized", 128, 64}});
  b.manifest.defaults.erase("block_size");
  try {
    rank_profiles_by_default_distance(b);
    FAIL();
  } catch (const MissingDefault& e) {
    EXPECT_EQ(e.knob(), "block_size");
  }
}

TEST(Ranking, MixedArchitecturesWithoutDefaultArchThrows) {
  ProfileBundle b = xs_bundle({{"a", "unionized", 128, 64}, {"b", "unionized", 128, 64}});
  b.manifest.defaults.erase(kGpuArchKey);
  EXPECT_NO_THROW(rank_profiles_by_default_distance(b));
  b.profiles[0].config.gpu_arch = "sm_70";
  EXPECT_THROW(rank_profiles_by_default_distance(b), MissingDefault);
}

TEST(Ranking, DegenerateRangeDoesNotDivideByZero) {
  auto r = rank_profiles_by_default_distance(xs_bundle({{"a", "unionized", 256, 64}}));
  EXPECT_DOUBLE_EQ(r[0].distance, 128.0);
}

TEST(Ranking, XsbenchFixtureTopThree) {
  auto ids = ranked_ids(rank_profiles_by_default_distance(load_bundle(kexplain::testing::fixture("xsbench-75"))));
  ASSERT_EQ(ids.size(), 75u);
  EXPECT_EQ(ids[0], "unionized-b0128-r064");
  EXPECT_EQ(ids[1], "unionized-b0064-r064");
  EXPECT_EQ(ids[2], "unionized-b0032-r064");
}
