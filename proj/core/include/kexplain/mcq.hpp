#pragma once

// Multiple-choice question task. Each attempt asks every question once with
// the choices in an attempt-seeded order; the model must end its reply with
// `ANSWER: <letter>`.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/assets.hpp"
#include "kexplain/llm.hpp"
#include "kexplain/model.hpp"

namespace kexplain {

struct McqQuestion {
  std::string question;
  std::vector<std::string> correct_choices;
  std::vector<std::string> incorrect_choices;
};

struct McqValidation {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;  // e.g. questions with several correct choices
  bool ok() const { return errors.empty(); }
};

/// Parses the questions file (a JSON array of objects with exactly the
/// fields `question`, `correct_choices`, `incorrect_choices`).
std::vector<McqQuestion> parse_mcq_questions(const nlohmann::json& j);
McqValidation validate_mcq_questions(const std::vector<McqQuestion>& questions);

/// Order in which the choices of one question are shown: indices into
/// correct_choices followed by incorrect_choices. Deterministic in
/// (seed, attempt, question); every permutation is equally likely.
std::vector<std::size_t> choice_order(std::size_t choice_count, std::uint64_t seed, int attempt,
                                      std::size_t question_index);

/// Letter from the last non-empty line when it reads `ANSWER: <letter>`.
std::optional<char> parse_answer_letter(std::string_view reply);

/// Context shown to the model. `kind` is "none", "code", "code+data" or
/// "report" (then `report_text` is used).
std::string build_eval_context(const std::string& kind, const ProfileBundle& bundle,
                               const std::string& report_text, std::size_t source_budget_chars);

struct McqOptions {
  int attempts = 20;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::optional<double> temperature;
  assets::Library library;
};

struct McqAnswer {
  std::size_t question_index = 0;
  std::optional<char> letter;
  bool correct = false;
};

struct McqAttempt {
  int index = 1;
  bool valid = true;
  double score = 0.0;
  std::vector<McqAnswer> answers;
  std::string error;  // gateway error that invalidated the attempt
};

struct McqResult {
  std::vector<McqAttempt> attempts;
  std::optional<double> score_at_1;  // mean over valid attempts
};

McqResult run_mcq(const std::vector<McqQuestion>& questions, const std::string& context,
                  const llm::Gateway& gateway, const McqOptions& options);

nlohmann::json to_json(const McqResult& result);

}  // namespace kexplain
