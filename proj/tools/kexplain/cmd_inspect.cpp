#include <iomanip>
#include <iostream>

#include "common.hpp"
#include "kexplain/citations.hpp"
#include "kexplain/drgpu.hpp"
#include "kexplain/ingest.hpp"
#include "kexplain/ranking.hpp"

using nlohmann::json;

namespace kexplain::cli {

namespace {

struct InspectArgs {
  std::string bundle_dir;
  std::string file;
  bool json_output = false;
};

int run_rank(const InspectArgs& args) {
  ProfileBundle bundle = load_bundle(args.bundle_dir);
  auto ranking = rank_profiles_by_default_distance(bundle);
  if (args.json_output) {
    json out = json::array();
    for (const auto& r : ranking) {
      json parts = json::object();
      for (const auto& [knob, d] : r.contributions) parts[knob] = d;
      out.push_back({{"profile", r.profile_id}, {"distance", r.distance}, {"contributions", parts}});
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
  }
  int rank = 0;
  for (const auto& r : ranking) {
    std::cout << std::setw(3) << ++rank << "  " << r.profile_id << "  " << std::fixed << std::setprecision(4)
              << r.distance << " ";
    for (const auto& [knob, d] : r.contributions) std::cout << " " << knob << "=" << d;
    std::cout << "\n";
  }
  return kOk;
}

int run_validate(const InspectArgs& args) {
  ProfileBundle bundle = load_bundle(args.bundle_dir);
  auto findings = validate_citations(read_text_file(args.file), bundle);
  if (args.json_output) {
    std::cout << findings_to_json(findings).dump(2) << "\n";
  } else {
    for (const auto& f : findings) {
      std::cout << to_string(f.kind) << "  " << f.citation.profile_id << " " << f.citation.metric_name << " = "
                << f.citation.quoted_value;
      if (f.kind == FindingKind::value_mismatch) {
        std::cout << "  (actual " << (f.actual ? std::to_string(*f.actual) : "?");
        if (f.relative_error) std::cout << ", relative error " << *f.relative_error;
        std::cout << ")";
      }
      std::cout << "\n";
    }
    std::cout << findings.size() << " citation(s) checked\n";
  }
  return has_value_mismatch(findings) ? kDegraded : kOk;
}

int run_textify(const InspectArgs& args) {
  json tree;
  try {
    tree = json::parse(read_text_file(args.file));
  } catch (const json::parse_error& e) {
    throw Error("stall tree is not valid JSON: " + std::string(e.what()));
  }
  std::cout << drgpu::textify(tree);
  return kOk;
}

int run_export(const InspectArgs& args) {
  ProfileBundle bundle = load_bundle(args.bundle_dir);
  if (args.file.empty() || args.file == "-") {
    std::cout << serialize_bundle_json(bundle);
  } else {
    write_text_file(args.file, serialize_bundle_json(bundle));
  }
  return kOk;
}

}  // namespace

void register_inspect(CLI::App& app, int& exit_code) {
  auto rank = std::make_shared<InspectArgs>();
  CLI::App* r = app.add_subcommand("rank-profiles", "Order profiles by distance from the default configuration");
  r->add_option("bundle_dir", rank->bundle_dir, "Profile bundle (directory or JSON file)")->required()->check(CLI::ExistingPath);
  r->add_flag("--json", rank->json_output, "Print JSON");
  r->callback([rank, &exit_code] { exit_code = run_rank(*rank); });

  auto val = std::make_shared<InspectArgs>();
  CLI::App* v = app.add_subcommand("validate-report", "Check the metric citations of a report against the bundle");
  v->add_option("bundle_dir", val->bundle_dir, "Profile bundle (directory or JSON file)")->required()->check(CLI::ExistingPath);
  v->add_option("report", val->file, "Report file")->required()->check(CLI::ExistingFile);
  v->add_flag("--json", val->json_output, "Print JSON");
  v->callback([val, &exit_code] { exit_code = run_validate(*val); });

  auto tx = std::make_shared<InspectArgs>();
  CLI::App* t = app.add_subcommand("textify-drgpu", "Render a DrGPU stall tree as a plain-text report");
  t->add_option("tree", tx->file, "Stall tree JSON")->required()->check(CLI::ExistingFile);
  t->callback([tx, &exit_code] { exit_code = run_textify(*tx); });

  auto ex = std::make_shared<InspectArgs>();
  CLI::App* e = app.add_subcommand("export-bundle", "Write a bundle as a single JSON document");
  e->add_option("bundle_dir", ex->bundle_dir, "Profile bundle (directory or JSON file)")
      ->required()
      ->check(CLI::ExistingPath);
  e->add_option("--out,-o", ex->file, "Output file (default stdout)");
  e->callback([ex, &exit_code] { exit_code = run_export(*ex); });
}

}  // namespace kexplain::cli
