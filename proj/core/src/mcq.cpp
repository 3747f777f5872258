#include "kexplain/mcq.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <limits>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "kexplain/metrics.hpp"
#include "kexplain/roles.hpp"
#include "kexplain/structured.hpp"

using nlohmann::json;

namespace kexplain {

std::vector<McqQuestion> parse_mcq_questions(const json& j) {
  if (!j.is_array()) throw Error("questions file must hold a JSON array");
  std::vector<McqQuestion> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& q = j[i];
    const std::string where = "question " + std::to_string(i + 1);
    if (!q.is_object()) throw Error(where + " is not an object");
    for (const auto& [key, value] : q.items()) {
      if (key != "question" && key != "correct_choices" && key != "incorrect_choices") {
        throw Error(where + " has unknown field '" + key + "'");
      }
    }
    McqQuestion m;
    try {
      m.question = q.at("question").get<std::string>();
      m.correct_choices = q.at("correct_choices").get<std::vector<std::string>>();
      m.incorrect_choices = q.at("incorrect_choices").get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw Error(where + " needs string 'question' and string-list 'correct_choices' and 'incorrect_choices'");
    }
    out.push_back(std::move(m));
  }
  return out;
}

McqValidation validate_mcq_questions(const std::vector<McqQuestion>& questions) {
  McqValidation v;
  if (questions.empty()) v.errors.push_back("no questions");
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto& q = questions[i];
    const std::string where = "question " + std::to_string(i + 1);
    if (trim_copy(q.question).empty()) v.errors.push_back(where + ": empty question text");
    if (q.correct_choices.empty()) v.errors.push_back(where + ": no correct choices");
    if (q.incorrect_choices.empty()) v.errors.push_back(where + ": no incorrect choices");
    std::set<std::string> seen;
    for (const auto* list : {&q.correct_choices, &q.incorrect_choices}) {
      for (const auto& c : *list) {
        if (!seen.insert(c).second) v.errors.push_back(where + ": duplicate choice '" + c + "'");
      }
    }
    if (q.correct_choices.size() + q.incorrect_choices.size() > 26) {
      v.errors.push_back(where + ": more than 26 choices");
    }
    if (q.correct_choices.size() > 1) {
      v.warnings.push_back(where + ": several correct choices; any one of them scores");
    }
  }
  return v;
}

namespace {

// Uniform draw from [0, bound) by rejection; std::uniform_int_distribution
// is not reproducible across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

std::vector<std::size_t> choice_order(std::size_t choice_count, std::uint64_t seed, int attempt,
                                      std::size_t question_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(attempt), static_cast<std::uint32_t>(question_index)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(choice_count);
  for (std::size_t i = 0; i < choice_count; ++i) order[i] = i;
  for (std::size_t i = choice_count; i > 1; --i) {
    std::swap(order[i - 1], order[bounded(rng, i)]);
  }
  return order;
}

std::optional<char> parse_answer_letter(std::string_view reply) {
  static const std::regex re(R"(^\s*\**\s*ANSWER\s*:\s*\**\s*\(?([A-Za-z])\)?\.?\s*\**\s*$)", std::regex::icase);
  std::string text(reply);
  std::size_t end = text.find_last_not_of(" \t\r\n");
  if (end == std::string::npos) return std::nullopt;
  std::size_t start = text.rfind('\n', end);
  std::string last = text.substr(start == std::string::npos ? 0 : start + 1, end + 1 - (start == std::string::npos ? 0 : start + 1));
  std::smatch m;
  if (!std::regex_match(last, m, re)) return std::nullopt;
  return static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0])));
}

std::string build_eval_context(const std::string& kind, const ProfileBundle& bundle,
                               const std::string& report_text, std::size_t source_budget_chars) {
  if (kind == "none") return "(no context)";
  if (kind == "report") return report_text;
  if (kind != "code" && kind != "code+data") {
    throw Error("unknown context kind '" + kind + "' (expected none, code, code+data or a report)");
  }
  std::string out = "Source code:\n\n" + roles::render_sources(bundle.sources, source_budget_chars);
  if (kind == "code+data") {
    std::vector<const KernelProfile*> profiles;
    std::ostringstream configs;
    for (const auto& p : bundle.profiles) {
      profiles.push_back(&p);
      configs << "- " << roles::render_run_config(p, bundle.manifest) << "\n";
    }
    out += "Run configurations:\n" + configs.str() + "\nProfiler metrics:\n\n" +
           roles::render_metric_table(profiles, roles::available_metrics(profiles));
  }
  return out;
}

namespace {

McqAttempt run_attempt(const std::vector<McqQuestion>& questions, const std::string& context,
                       const llm::Gateway& gateway, const McqOptions& options, int attempt) {
  McqAttempt a;
  a.index = attempt;
  const std::string system = options.library.text("prompts/system.txt");
  const std::string tmpl = options.library.text("prompts/mcq.txt");
  int correct = 0;
  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    const McqQuestion& q = questions[qi];
    std::vector<std::string> all = q.correct_choices;
    all.insert(all.end(), q.incorrect_choices.begin(), q.incorrect_choices.end());
    auto order = choice_order(all.size(), options.seed, attempt, qi);
    std::string choices;
    for (std::size_t i = 0; i < order.size(); ++i) {
      choices += std::string(1, static_cast<char>('A' + i)) + ". " + all[order[i]] + "\n";
    }
    llm::ChatRequest req;
    req.system_prompt = system;
    req.messages.push_back(
        {llm::Role::user, assets::render(tmpl, {{"context", context}, {"question", q.question}, {"choices", choices}})});
    req.temperature = options.temperature;
    McqAnswer ans;
    ans.question_index = qi;
    try {
      ans.letter = parse_answer_letter(gateway.complete(req).content);
    } catch (const llm::GatewayError& e) {
      a.valid = false;
      a.error = e.what();
      return a;
    }
    if (ans.letter) {
      std::size_t pos = static_cast<std::size_t>(*ans.letter - 'A');
      ans.correct = pos < order.size() && order[pos] < q.correct_choices.size();
    }
    if (ans.correct) ++correct;
    a.answers.push_back(ans);
  }
  a.score = questions.empty() ? 0.0 : static_cast<double>(correct) / questions.size();
  return a;
}

}  // namespace

McqResult run_mcq(const std::vector<McqQuestion>& questions, const std::string& context,
                  const llm::Gateway& gateway, const McqOptions& options) {
  auto v = validate_mcq_questions(questions);
  if (!v.ok()) throw PreconditionError("invalid questions: " + v.errors.front());
  if (options.attempts < 1) throw PreconditionError("attempts must be at least 1");

  McqResult result;
  result.attempts.resize(options.attempts);
  const int jobs = std::max(1, options.jobs);
  for (int start = 0; start < options.attempts; start += jobs) {
    std::vector<std::future<McqAttempt>> batch;
    for (int i = start; i < std::min(options.attempts, start + jobs); ++i) {
      batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async,
                                 [&, i] { return run_attempt(questions, context, gateway, options, i + 1); }));
    }
    for (std::size_t b = 0; b < batch.size(); ++b) result.attempts[start + b] = batch[b].get();
  }

  std::vector<double> scores;
  for (const auto& a : result.attempts) {
    if (a.valid) scores.push_back(a.score);
  }
  if (!scores.empty()) result.score_at_1 = score_at_1(scores);
  return result;
}

json to_json(const McqResult& result) {
  json attempts = json::array();
  for (const auto& a : result.attempts) {
    json answers = json::array();
    for (const auto& ans : a.answers) {
      answers.push_back({{"question", ans.question_index + 1},
                         {"answer", ans.letter ? json(std::string(1, *ans.letter)) : json(nullptr)},
                         {"correct", ans.correct}});
    }
    attempts.push_back({{"attempt", a.index},
                        {"valid", a.valid},
                        {"score", a.valid ? json(a.score) : json(nullptr)},
                        {"error", a.error.empty() ? json(nullptr) : json(a.error)},
                        {"answers", answers}});
  }
  return {{"task", "mcq"},
          {"attempts", attempts},
          {"score_at_1", result.score_at_1 ? json(*result.score_at_1) : json(nullptr)}};
}

}  // namespace kexplain
