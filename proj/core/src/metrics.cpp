#include "kexplain/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

using nlohmann::json;

namespace kexplain {

double pass_at_k(int n, int c, int k) {
  if (n < 0 || c < 0 || c > n) {
    throw DomainError("pass_at_k requires 0 <= c <= n (n=" + std::to_string(n) + ", c=" + std::to_string(c) + ")");
  }
  if (k < 1 || k > n) {
    throw DomainError("pass_at_k requires 1 <= k <= n (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
  if (k == 1) return static_cast<double>(c) / static_cast<double>(n);
  if (n - c < k) return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i=n-c+1}^{n} (1 - k / i)
  long double fail = 1.0L;
  for (int i = n - c + 1; i <= n; ++i) fail *= 1.0L - static_cast<long double>(k) / i;
  return static_cast<double>(1.0L - fail);
}

double speedup_at_k(std::span<const double> speedups, int k) {
  const int n = static_cast<int>(speedups.size());
  if (n == 0) throw DomainError("speedup_at_k requires at least one speedup");
  if (k < 1 || k > n) {
    throw DomainError("speedup_at_k requires 1 <= k <= N (N=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
  for (double s : speedups) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("speedups must be positive and finite");
  }
  std::vector<double> sorted(speedups.begin(), speedups.end());
  std::sort(sorted.begin(), sorted.end());

  if (k == 1) {
    long double sum = 0.0L;
    for (double s : sorted) sum += s;
    return static_cast<double>(sum / n);
  }
  // w_k = 1 / C(N, k); w_{j+1} = w_j * j / (j - k + 1).
  long double w = 1.0L;
  for (int i = 1; i <= k; ++i) w *= static_cast<long double>(i) / (n - k + i);
  long double total = 0.0L;
  for (int j = k; j <= n; ++j) {
    total += w * sorted[j - 1];
    w *= static_cast<long double>(j) / (j - k + 1);
  }
  return static_cast<double>(total);
}

double score_at_1(std::span<const double> scores) {
  if (scores.empty()) throw DomainError("score_at_1 requires at least one score");
  long double sum = 0.0L;
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("attempt scores must lie in [0, 1]");
    sum += s;
  }
  return static_cast<double>(sum / scores.size());
}

double harmonic_mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("harmonic_mean requires at least one value");
  long double inv = 0.0L;
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("harmonic_mean requires positive finite values");
    inv += 1.0L / v;
  }
  return static_cast<double>(values.size() / inv);
}

ReportSummary summarize_report(const std::vector<EvalOutcome>& outcomes) {
  ReportSummary s;
  s.attempts = static_cast<int>(outcomes.size());
  std::vector<double> speedups;
  for (const auto& o : outcomes) {
    if (o.status != OutcomeStatus::valid) continue;
    ++s.valid;
    if (o.speedup) speedups.push_back(*o.speedup);
  }
  if (s.attempts > 0) s.pass_at_1 = pass_at_k(s.attempts, s.valid, 1);
  if (!speedups.empty()) {
    s.speedup_at_1 = speedup_at_k(speedups, 1);
    s.max_speedup = *std::max_element(speedups.begin(), speedups.end());
  }
  return s;
}

SettingSummary summarize_results(const std::vector<std::vector<EvalOutcome>>& outcomes_per_report) {
  if (outcomes_per_report.empty()) throw DomainError("summarize_results requires at least one report");
  SettingSummary s;
  std::vector<double> defined;
  long double pass_sum = 0.0L;
  for (const auto& outcomes : outcomes_per_report) {
    ReportSummary r = summarize_report(outcomes);
    pass_sum += r.pass_at_1;
    if (r.speedup_at_1) defined.push_back(*r.speedup_at_1);
    if (r.max_speedup && (!s.max_speedup || *r.max_speedup > *s.max_speedup)) s.max_speedup = r.max_speedup;
    s.reports.push_back(r);
  }
  if (!defined.empty()) s.harmonic_speedup_at_1 = harmonic_mean(defined);
  s.mean_pass_at_1 = static_cast<double>(pass_sum / outcomes_per_report.size());
  return s;
}

namespace {
json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
}  // namespace

json to_json(const ReportSummary& s) {
  return {{"attempts", s.attempts},
          {"valid", s.valid},
          {"pass_at_1", s.pass_at_1},
          {"speedup_at_1", opt(s.speedup_at_1)},
          {"max_speedup", opt(s.max_speedup)}};
}

json to_json(const SettingSummary& s) {
  json reports = json::array();
  for (const auto& r : s.reports) reports.push_back(to_json(r));
  return {{"reports", reports},
          {"harmonic_speedup_at_1", opt(s.harmonic_speedup_at_1)},
          {"max_speedup", opt(s.max_speedup)},
          {"mean_pass_at_1", s.mean_pass_at_1}};
}

}  // namespace kexplain
