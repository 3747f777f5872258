#include <gtest/gtest.h>

#include "kexplain/assets.hpp"
#include "kexplain/techniques.hpp"
#include "test_support.hpp"

using namespace kexplain;
using kexplain::testing::json_block;

namespace {

struct Env {
  std::shared_ptr<kexplain::testing::RoleRouter> router = std::make_shared<kexplain::testing::RoleRouter>();
  std::shared_ptr<llm::Gateway> gateway = kexplain::testing::router_gateway(router);
  roles::RoleEnv env() const {
    roles::RoleEnv e;
    e.gateway = gateway.get();
    return e;
  }
};

}  // namespace

TEST(Taxonomy, ParsesBuiltin) {
  auto t = parse_taxonomy(std::string(assets::builtin("taxonomy.txt")));
  EXPECT_NE(std::find(t.begin(), t.end(), "restrict qualifiers"), t.end());
  EXPECT_EQ(parse_taxonomy("# comment\n a \n\nb\n"), (std::vector<std::string>{"a", "b"}));
}

TEST(LabelTechniques, RestrictOnlyDiff) {
  Env e;
  e.router->on("label", json_block(R"({"labels": ["Restrict Qualifiers"]})"));
  auto out = label_techniques("-void k(float* a)\n+void k(float* __restrict__ a)\n", "Added __restrict__.", e.env());
  EXPECT_EQ(out.parsed, std::vector<std::string>{"restrict qualifiers"});
}

TEST(LabelTechniques, EmptyDiffNoCall) {
  Env e;
  auto out = label_techniques("", "nothing", e.env());
  EXPECT_TRUE(out.parsed.empty());
  EXPECT_FALSE(out.called_llm());
  EXPECT_EQ(e.router->calls("label"), 0);
}

TEST(LabelTechniques, UnknownLabelsDropped) {
  Env e;
  e.router->on("label", json_block(R"({"labels": ["loop unroll", "quantum tunnelling", "__ldg", "loop unroll"]})"));
  auto out = label_techniques("+x\n", "", e.env());
  EXPECT_EQ(out.parsed, (std::vector<std::string>{"loop unroll", "__ldg"}));
}

TEST(LabelTechniques, UnparseableReplyDegraded) {
  Env e;
  e.router->on("label", "I used several techniques.");
  auto out = label_techniques("+x\n", "", e.env());
  EXPECT_TRUE(out.parsed.empty());
  EXPECT_TRUE(out.degraded);
}
