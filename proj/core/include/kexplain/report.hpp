#pragma once

// Markdown rendering of the final report and review. Output depends only on
// the inputs, so replayed runs produce byte-identical files.

#include <string>
#include <string_view>

#include "kexplain/model.hpp"

namespace kexplain {

std::string render_report_markdown(const ExplanationReport& report, const BundleManifest& manifest);

std::string render_review_markdown(const ReviewReport& review, const HypothesisSet& hypotheses);

/// True when a rendered report lists at least one suggestion under a
/// suggestions heading. Used by the optimization task to decide whether the
/// model must find optimizations on its own.
bool report_has_suggestions(std::string_view markdown);

}  // namespace kexplain
