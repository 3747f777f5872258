#pragma once

// Evaluation estimators: pass@k, speedup@k, score@1 and the harmonic mean,
// plus per-report and per-setting summaries of optimization outcomes.

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/errors.hpp"
#include "kexplain/model.hpp"

namespace kexplain {

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Probability that at least one of k samples drawn without replacement from
/// n samples (c of them correct) is correct: 1 - C(n-c, k) / C(n, k).
/// Requires 0 <= c <= n and 1 <= k <= n. For k = 1 the result is exactly
/// c / n.
double pass_at_k(int n, int c, int k);

/// Expected maximum of k distinct samples drawn uniformly from `speedups`.
/// The samples are sorted ascending and sample j (1-based) is weighted by
/// C(j-1, k-1) / C(N, k). Requires positive finite values and 1 <= k <= N.
double speedup_at_k(std::span<const double> speedups, int k);

/// Arithmetic mean of per-attempt fractions in [0, 1].
double score_at_1(std::span<const double> scores);

/// n / sum(1 / v) over positive values.
double harmonic_mean(std::span<const double> values);

struct ReportSummary {
  int attempts = 0;
  int valid = 0;
  double pass_at_1 = 0.0;
  std::optional<double> speedup_at_1;  // undefined without valid outcomes
  std::optional<double> max_speedup;
};

struct SettingSummary {
  std::vector<ReportSummary> reports;
  // Harmonic mean of the defined per-report speedup@1 values.
  std::optional<double> harmonic_speedup_at_1;
  std::optional<double> max_speedup;
  double mean_pass_at_1 = 0.0;
};

/// Only valid outcomes enter speedup@1 and the maximum; every outcome counts
/// toward pass@1.
ReportSummary summarize_report(const std::vector<EvalOutcome>& outcomes);
SettingSummary summarize_results(const std::vector<std::vector<EvalOutcome>>& outcomes_per_report);

nlohmann::json to_json(const ReportSummary& s);
nlohmann::json to_json(const SettingSummary& s);

}  // namespace kexplain
