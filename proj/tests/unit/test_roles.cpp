#include <gtest/gtest.h>

#include <algorithm>

#include "kexplain/ranking.hpp"
#include "kexplain/roles.hpp"
#include "test_support.hpp"

using namespace kexplain;
using namespace kexplain::roles;
using kexplain::testing::json_block;
using kexplain::testing::RoleRouter;

namespace {

struct Env {
  std::shared_ptr<RoleRouter> router = std::make_shared<RoleRouter>();
  std::shared_ptr<llm::Gateway> gateway = kexplain::testing::router_gateway(router);
  RoleEnv env() const {
    RoleEnv e;
    e.gateway = gateway.get();
    return e;
  }
};

HypothesisSet three_hypotheses() {
  HypothesisSet hs;
  for (int i = 1; i <= 3; ++i) hs.push_back({"H" + std::to_string(i), "statement " + std::to_string(i), {}, {}});
  return hs;
}

std::vector<const KernelProfile*> pointers(const ProfileBundle& b) {
  std::vector<const KernelProfile*> out;
  for (const auto& p : b.profiles) out.push_back(&p);
  return out;
}

}  // namespace

// --- describe -------------------------------------------------------------

TEST(DescribeSourceFile, EmptyFileRejectedBeforeAnyCall) {
  Env e;
  EXPECT_THROW(describe_source_file({"a.cu", ""}, e.env()), PreconditionError);
  EXPECT_EQ(e.router->calls("describe"), 0);
}

TEST(DescribeSourceFile, CappedAt200Words) {
  Env e;
  std::string long_text;
  for (int i = 0; i < 300; ++i) long_text += "word ";
  e.router->on("describe", long_text);
  auto out = describe_source_file({"a.cu", "int x;\n"}, e.env());
  EXPECT_TRUE(out.called_llm());
  EXPECT_EQ(out.role_name, "file_describer");
  std::size_t words = std::count(out.parsed.begin(), out.parsed.end(), ' ') + 1;
  EXPECT_EQ(words, 200u);
}

TEST(DescribeSourceFile, IndependentOfOrder) {
  Env e;
  e.router->on("describe", [](const llm::ChatRequest& r) {
    return r.messages[0].content.find("alpha") != std::string::npos ? "describes alpha" : "describes beta";
  });
  SourceFile a{"a.cu", "alpha\n"}, b{"b.cu", "beta\n"};
  auto a1 = describe_source_file(a, e.env()).parsed;
  auto b1 = describe_source_file(b, e.env()).parsed;
  auto b2 = describe_source_file(b, e.env()).parsed;
  auto a2 = describe_source_file(a, e.env()).parsed;
  EXPECT_EQ(a1, a2);
  EXPECT_EQ(b1, b2);
  EXPECT_NE(a1, b1);
}

// --- select_source_file ----------------------------------------------------

TEST(SelectSourceFile, SingleUnreviewedFileRegardlessOfReply) {
  Env e;
  e.router->on("select_file", json_block(R"({"file": "nonsense.cu"})"));
  auto out = select_source_file({{"a.cu", "A"}, {"b.cu", "B"}}, {"a.cu"}, {}, e.env());
  EXPECT_EQ(out.parsed, "b.cu");
}

TEST(SelectSourceFile, ReviewedChoiceClampedToLexicographicFirstUnreviewed) {
  Env e;
  e.router->on("select_file", json_block(R"({"file": "a.cu"})"));
  auto out = select_source_file({{"a.cu", "A"}, {"c.cu", "C"}, {"b.cu", "B"}}, {"a.cu"}, {}, e.env());
  EXPECT_EQ(out.parsed, "b.cu");
  EXPECT_FALSE(out.notes.empty());
}

TEST(SelectSourceFile, ValidChoiceKept) {
  Env e;
  e.router->on("select_file", json_block(R"({"file": "c.cu"})"));
  auto out = select_source_file({{"a.cu", "A"}, {"c.cu", "C"}, {"b.cu", "B"}}, {"a.cu"}, {}, e.env());
  EXPECT_EQ(out.parsed, "c.cu");
  EXPECT_FALSE(out.degraded);
}

TEST(SelectSourceFile, GarbageFallsBackDeterministically) {
  Env e;
  e.router->on("select_file", "I cannot decide");
  auto out = select_source_file({{"z.cu", "Z"}, {"m.cu", "M"}}, {}, {}, e.env());
  EXPECT_EQ(out.parsed, "m.cu");
  EXPECT_TRUE(out.degraded);
}

// --- summarize / hypothesize ----------------------------------------------

TEST(SummarizeAlgorithm, CoverageGrowsByFile) {
  Env e;
  e.router->on("summarize", "Row update of Gaussian elimination.");
  AlgorithmSummary prev{"old", {"a.cu"}};
  auto out = summarize_algorithm(prev, {"b.cu", "x"}, e.env());
  EXPECT_EQ(out.parsed.files_covered, (std::set<std::string>{"a.cu", "b.cu"}));
  EXPECT_EQ(out.parsed.text, "Row update of Gaussian elimination.");
}

TEST(HypothesizePerformance, FirstFileProducesPendingHypotheses) {
  Env e;
  e.router->on("hypothesize", json_block(R"({"hypotheses": [{"statement": "uncoalesced loads"},
                                                            {"statement": "low occupancy", "status": "confirmed"}]})"));
  auto out = hypothesize_performance({}, {}, {"a.cu", "x"}, e.env());
  ASSERT_EQ(out.parsed.size(), 2u);
  EXPECT_EQ(out.parsed[0].id, "H1");
  EXPECT_EQ(out.parsed[1].id, "H2");
  for (const auto& h : out.parsed) EXPECT_EQ(h.status, HypothesisStatus::pending);
}

TEST(HypothesizePerformance, ParseFailureLeavesSetUnchanged) {
  Env e;
  e.router->on("hypothesize", "```json\n{not json\n```");
  HypothesisSet hs = three_hypotheses();
  auto out = hypothesize_performance(hs, {}, {"a.cu", "x"}, e.env());
  EXPECT_TRUE(out.degraded);
  EXPECT_EQ(out.parsed, hs);
}

TEST(HypothesizePerformance, IdsStableAcrossTwoUpdates) {
  Env e;
  int round = 0;
  e.router->on("hypothesize", [&](const llm::ChatRequest&) {
    ++round;
    if (round == 1) return json_block(R"({"hypotheses": [{"statement": "a"}, {"statement": "b"}]})");
    return json_block(R"({"hypotheses": [{"id": "H2", "statement": "b revised"}, {"statement": "c"},
                                         {"id": "H99", "statement": "d"}]})");
  });
  auto first = hypothesize_performance({}, {}, {"a.cu", "x"}, e.env()).parsed;
  auto second = hypothesize_performance(first, {}, {"b.cu", "y"}, e.env()).parsed;
  ASSERT_EQ(second.size(), 4u);
  EXPECT_EQ(second[0].id, "H1");
  EXPECT_EQ(second[0].statement, "a");
  EXPECT_EQ(second[1].id, "H2");
  EXPECT_EQ(second[1].statement, "b revised");
  EXPECT_EQ(second[2].id, "H3");
  EXPECT_EQ(second[3].id, "H4");
}

// --- select_profiles -------------------------------------------------------

namespace {

ProfileSelectionRequest selection(const ProfileBundle& b, std::set<std::string> analyzed) {
  ProfileSelectionRequest req;
  req.bundle = &b;
  req.analyzed = std::move(analyzed);
  req.rank_order = ranked_ids(rank_profiles_by_default_distance(b));
  return req;
}

}  // namespace

TEST(SelectProfiles, SingleProfileBypassesModel) {
  Env e;
  ProfileBundle b = kexplain::testing::small_bundle(1);
  auto out = select_profiles(selection(b, {}), e.env());
  EXPECT_EQ(out.parsed, std::vector<std::string>{"p1"});
  EXPECT_FALSE(out.called_llm());
  EXPECT_EQ(e.router->calls("select_profiles"), 0);
}

TEST(SelectProfiles, OnlyAnalyzedIdsGetFirstUnanalyzedByRankInjected) {
  Env e;
  e.router->on("select_profiles", json_block(R"({"profiles": ["p4"]})"));
  ProfileBundle b = kexplain::testing::small_bundle(4);  // block sizes 32..128, default 128
  auto out = select_profiles(selection(b, {"p4"}), e.env());
  ASSERT_FALSE(out.parsed.empty());
  EXPECT_EQ(out.parsed.front(), "p3");
  EXPECT_NE(std::find(out.parsed.begin(), out.parsed.end(), "p4"), out.parsed.end());
}

TEST(SelectProfiles, UnknownAndDuplicateIdsDropped) {
  Env e;
  e.router->on("select_profiles", json_block(R"({"profiles": ["ghost", "p2", "p2", "p1"]})"));
  ProfileBundle b = kexplain::testing::small_bundle(3);
  auto out = select_profiles(selection(b, {}), e.env());
  EXPECT_EQ(out.parsed, (std::vector<std::string>{"p2", "p1"}));
}

TEST(SelectProfiles, DisabledTakesNextByRank) {
  Env e;
  ProfileBundle b = kexplain::testing::small_bundle(3);
  auto req = selection(b, {"p3"});
  req.enabled = false;
  auto out = select_profiles(req, e.env());
  EXPECT_EQ(out.parsed, std::vector<std::string>{"p2"});
  EXPECT_FALSE(out.called_llm());
}

TEST(SelectProfiles, SelectionCappedAndKeepsAFreshProfile) {
  Env e;
  e.router->on("select_profiles", json_block(R"({"profiles": ["p1", "p2", "p3", "p4"]})"));
  ProfileBundle b = kexplain::testing::small_bundle(4);
  RoleEnv env = e.env();
  env.settings.max_profiles_per_pass = 2;
  auto out = select_profiles(selection(b, {"p1", "p2", "p3"}), env);
  ASSERT_EQ(out.parsed.size(), 2u);
  EXPECT_NE(std::find(out.parsed.begin(), out.parsed.end(), "p4"), out.parsed.end());
}

// --- select_metrics --------------------------------------------------------

namespace {

ProfileBundle forty_metric_bundle() {
  ProfileBundle b = kexplain::testing::small_bundle(1);
  b.profiles[0].metrics.clear();
  for (int i = 0; i < 40; ++i) {
    b.profiles[0].metrics.push_back(kexplain::testing::num_metric("metric_" + std::to_string(100 + i), i));
  }
  return b;
}

}  // namespace

TEST(SelectMetrics, DisabledReturnsFullList) {
  Env e;
  ProfileBundle b = forty_metric_bundle();
  auto out = select_metrics(pointers(b), {}, {}, false, e.env());
  EXPECT_EQ(out.parsed.size(), 40u);
  EXPECT_FALSE(out.called_llm());
}

TEST(SelectMetrics, UnknownNamesDropped) {
  Env e;
  e.router->on("select_metrics", json_block(R"({"metrics": ["metric_101", "made_up", "metric_139"]})"));
  ProfileBundle b = forty_metric_bundle();
  auto out = select_metrics(pointers(b), {}, {}, true, e.env());
  EXPECT_EQ(out.parsed, (std::vector<std::string>{"metric_101", "metric_139"}));
}

TEST(SelectMetrics, EmptySelectionFallsBackToAll) {
  Env e;
  e.router->on("select_metrics", json_block(R"({"metrics": ["made_up"]})"));
  ProfileBundle b = forty_metric_bundle();
  auto out = select_metrics(pointers(b), {}, {}, true, e.env());
  EXPECT_EQ(out.parsed.size(), 40u);
  EXPECT_TRUE(out.degraded);
}

TEST(SelectMetrics, UnionAcrossProfiles) {
  ProfileBundle b = kexplain::testing::small_bundle(2);
  b.profiles[1].metrics.push_back(kexplain::testing::num_metric("only_in_p2", 1));
  auto names = available_metrics(pointers(b));
  EXPECT_EQ(names.back(), "only_in_p2");
  EXPECT_EQ(names.size(), 4u);
}

TEST(SelectMetrics, FiveOfFortyReachTheAnalyzer) {
  Env e;
  e.router->on("select_metrics",
               json_block(R"({"metrics": ["metric_103", "metric_111", "metric_120", "metric_127", "metric_135"]})"));
  std::string analyze_prompt;
  e.router->on("analyze", [&](const llm::ChatRequest& r) {
    analyze_prompt = r.messages[0].content;
    return std::string("analysis");
  });
  ProfileBundle b = forty_metric_bundle();
  auto metrics = select_metrics(pointers(b), {}, {}, true, e.env()).parsed;
  AlgorithmSummary summary;
  HypothesisSet hs;
  AnalysisRequest req{1, &b, pointers(b), metrics, &summary, &hs, "guidelines"};
  auto pass = analyze_profiles(req, e.env()).parsed;
  EXPECT_EQ(pass.selected_metric_names, metrics);
  int present = 0;
  for (int i = 0; i < 40; ++i) {
    if (analyze_prompt.find("| metric_" + std::to_string(100 + i) + " |") != std::string::npos) ++present;
  }
  EXPECT_EQ(present, 5);
}

// --- analyze ----------------------------------------------------------------

TEST(AnalyzeProfiles, CitationOutsideSelectionIsUnresolved) {
  Env e;
  e.router->on("analyze",
               "DRAM is idle [[profile:p1 metric:dram__throughput = 1.5%]] while warps "
               "[[profile:p1 metric:sm__warps_active = 21%]] and [[profile:p2 metric:dram__throughput = 3%]].\n" +
                   json_block(R"({"suggestions": [{"title": "Coalesce", "rationale": "r"}]})"));
  ProfileBundle b = kexplain::testing::small_bundle(2);
  AlgorithmSummary summary;
  HypothesisSet hs;
  AnalysisRequest req{1, &b, {&b.profiles[0]}, {"dram__throughput"}, &summary, &hs, "g"};
  auto out = analyze_profiles(req, e.env());
  ASSERT_EQ(out.parsed.citations.size(), 3u);
  EXPECT_TRUE(out.parsed.citations[0].resolved);
  EXPECT_FALSE(out.parsed.citations[1].resolved);
  EXPECT_FALSE(out.parsed.citations[2].resolved);
  EXPECT_EQ(out.parsed.suggestions.size(), 1u);
  EXPECT_FALSE(out.degraded);
}

TEST(AnalyzeProfiles, CitationsMayReferenceBothProfiles) {
  Env e;
  e.router->on("analyze", "[[profile:p1 metric:dram__throughput = 1.5%]] [[profile:p2 metric:dram__throughput = 3%]]");
  ProfileBundle b = kexplain::testing::small_bundle(2);
  AlgorithmSummary summary;
  HypothesisSet hs;
  AnalysisRequest req{2, &b, pointers(b), {"dram__throughput"}, &summary, &hs, "g"};
  auto pass = analyze_profiles(req, e.env()).parsed;
  ASSERT_EQ(pass.citations.size(), 2u);
  EXPECT_TRUE(pass.citations[0].resolved && pass.citations[1].resolved);
  EXPECT_EQ(pass.pass_index, 2);
  EXPECT_EQ(pass.selected_profile_ids, (std::vector<std::string>{"p1", "p2"}));
}

TEST(AnalyzeProfiles, EmptyReplyIsARefusal) {
  Env e;
  e.router->on("analyze", "");
  ProfileBundle b = kexplain::testing::small_bundle(1);
  AlgorithmSummary summary;
  HypothesisSet hs;
  AnalysisRequest req{1, &b, pointers(b), {"dram__throughput"}, &summary, &hs, "g"};
  EXPECT_THROW(analyze_profiles(req, e.env()), llm::Refusal);
}

// --- drgpu -----------------------------------------------------------------

TEST(EvaluateDrgpu, DisabledIsIdentity) {
  Env e;
  AnalysisPass pass;
  pass.analysis_text = "text";
  auto out = evaluate_drgpu(pass, {std::string("report"), ""}, false, e.env());
  EXPECT_EQ(out.parsed, pass);
  EXPECT_FALSE(out.called_llm());
}

TEST(EvaluateDrgpu, AdapterFailureLeavesPassUnchangedWithWarning) {
  Env e;
  AnalysisPass pass;
  pass.suggestions = {{"a", "b", {}}};
  auto out = evaluate_drgpu(pass, {std::nullopt, "exit status 3"}, true, e.env());
  EXPECT_EQ(out.parsed.suggestions, pass.suggestions);
  EXPECT_EQ(out.parsed.analysis_text, pass.analysis_text);
  ASSERT_FALSE(out.notes.empty());
  EXPECT_NE(out.notes[0].find("exit status 3"), std::string::npos);
  EXPECT_FALSE(out.called_llm());
}

TEST(EvaluateDrgpu, AdoptedSuggestionGrowsList) {
  Env e;
  e.router->on("drgpu", json_block(R"({"adopted": [{"title": "Remove barriers", "rationale": "barrier stalls"}],
                                       "rejected": [{"title": "Use tensor cores", "reason": "no matrix math"}]})"));
  AnalysisPass pass;
  pass.suggestions = {{"Coalesce loads", "", {}}};
  auto out = evaluate_drgpu(pass, {std::string("barrier stall 40%"), ""}, true, e.env());
  ASSERT_EQ(out.parsed.suggestions.size(), pass.suggestions.size() + 1);
  EXPECT_EQ(out.parsed.suggestions.back().title, "Remove barriers");
  EXPECT_EQ(out.parsed.notes.size(), 2u);
}

// --- aggregate / review ----------------------------------------------------

namespace {

std::vector<AnalysisPass> passes(int n) {
  std::vector<AnalysisPass> out;
  for (int i = 1; i <= n; ++i) {
    AnalysisPass p;
    p.pass_index = i;
    p.selected_profile_ids = {"p" + std::to_string(i)};
    p.analysis_text = "pass " + std::to_string(i);
    p.suggestions = {{"s" + std::to_string(i), "", {}}};
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(AggregateAnalyses, ProvenanceListsPasses) {
  Env e;
  e.router->on("aggregate", json_block(R"({"summary": "s", "bottlenecks": ["b"], "suggestions": []})"));
  EXPECT_EQ(aggregate_analyses(passes(1), {}, "g", e.env()).parsed.provenance, std::vector<int>{1});
  EXPECT_EQ(aggregate_analyses(passes(3), {}, "g", e.env()).parsed.provenance, (std::vector<int>{1, 2, 3}));
}

TEST(AggregateAnalyses, UnparseableReplyFallsBackToPassTexts) {
  Env e;
  e.router->on("aggregate", "plain prose only");
  auto out = aggregate_analyses(passes(2), {}, "g", e.env());
  EXPECT_TRUE(out.degraded);
  EXPECT_EQ(out.parsed.suggestions.size(), 2u);
  EXPECT_EQ(out.parsed.provenance, (std::vector<int>{1, 2}));
}

TEST(ReviewExplanation, NoHypothesesNoCall) {
  Env e;
  auto out = review_explanation({}, {}, e.env());
  EXPECT_TRUE(out.parsed.verdicts.empty());
  EXPECT_FALSE(out.called_llm());
}

TEST(ReviewExplanation, UnparseableVerdictBecomesInconclusive) {
  Env e;
  e.router->on("review", json_block(R"({"verdicts": [{"id": "H1", "verdict": "confirmed"},
                                                     {"id": "H2", "verdict": "maybe?"},
                                                     {"id": "H3", "verdict": "refuted", "rationale": "r"}]})"));
  auto out = review_explanation({}, three_hypotheses(), e.env());
  ASSERT_EQ(out.parsed.verdicts.size(), 3u);
  EXPECT_EQ(out.parsed.verdicts[0].verdict, HypothesisStatus::confirmed);
  EXPECT_EQ(out.parsed.verdicts[1].verdict, HypothesisStatus::inconclusive);
  EXPECT_EQ(out.parsed.verdicts[2].verdict, HypothesisStatus::refuted);
}

TEST(ReviewExplanation, ScriptedVerdictMultiset) {
  Env e;
  e.router->on("review", json_block(R"({"verdicts": [{"id": "H3", "verdict": "confirmed"},
                                                     {"id": "H1", "verdict": "refuted"},
                                                     {"id": "H2", "verdict": "confirmed"}]})"));
  auto out = review_explanation({}, three_hypotheses(), e.env());
  std::multiset<HypothesisStatus> got;
  for (const auto& v : out.parsed.verdicts) got.insert(v.verdict);
  EXPECT_EQ(got, (std::multiset<HypothesisStatus>{HypothesisStatus::confirmed, HypothesisStatus::confirmed,
                                                 HypothesisStatus::refuted}));
  auto applied = apply_review(three_hypotheses(), out.parsed);
  EXPECT_EQ(applied[0].status, HypothesisStatus::refuted);
  EXPECT_EQ(applied[2].status, HypothesisStatus::confirmed);
}

TEST(ResolveCitations, DecidedFromBundleAlone) {
  ProfileBundle b = kexplain::testing::small_bundle(2);
  std::vector<MetricCitation> c = {{"p1", "dram__throughput", "1", false},
                                   {"p1", "missing", "1", true},
                                   {"p9", "dram__throughput", "1", true}};
  resolve_citations(c, b, {"p1", "p9"}, {"dram__throughput", "missing"});
  EXPECT_TRUE(c[0].resolved);
  EXPECT_FALSE(c[1].resolved);
  EXPECT_FALSE(c[2].resolved);
}
