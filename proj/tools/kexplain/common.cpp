#include "common.hpp"

#include <filesystem>

#include "kexplain/ingest.hpp"

namespace fs = std::filesystem;

namespace kexplain::cli {

void add_provider_flags(CLI::App& cmd, ProviderFlags& f) {
  cmd.add_option("--config", f.config, "Run configuration file (JSON)")->check(CLI::ExistingFile);
  cmd.add_option("--provider", f.kind, "Model provider: http, scripted or replay")
      ->check(CLI::IsMember({"http", "scripted", "replay"}));
  cmd.add_option("--endpoint", f.endpoint, "OpenAI-compatible endpoint base URL (http provider)");
  cmd.add_option("--model", f.model, "Model name (http provider)");
  cmd.add_option("--responses", f.responses, "JSON array of reply texts (scripted provider)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--replay", f.replay, "Answer every model call from this cassette; no network")
      ->check(CLI::ExistingFile);
  cmd.add_option("--record", f.record, "Append every model exchange to this cassette");
  cmd.add_option("--assets", f.assets, "Directory overriding built-in prompt templates and guidelines")
      ->check(CLI::ExistingDirectory);
}

PipelineConfig resolve_config(const ProviderFlags& f) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : load_pipeline_config(f.config);
  if (!f.kind.empty()) c.provider.kind = f.kind;
  if (!f.endpoint.empty()) c.provider.http.endpoint = f.endpoint;
  if (!f.model.empty()) c.provider.http.model = f.model;
  if (!f.responses.empty()) {
    c.provider.responses = f.responses;
    if (f.kind.empty()) c.provider.kind = "scripted";
  }
  if (!f.replay.empty()) {
    if (!f.record.empty()) throw Error("--replay and --record cannot be combined");
    c.provider.kind = "replay";
    c.provider.cassette = f.replay;
  }
  if (!f.assets.empty()) c.assets_dir = f.assets;
  return c;
}

std::unique_ptr<llm::Gateway> make_gateway(const PipelineConfig& config, const ProviderFlags& f) {
  std::shared_ptr<llm::ChatProvider> provider = make_provider(config.provider);
  if (!f.record.empty()) {
    auto cassette = std::make_shared<llm::Cassette>();
    if (fs::exists(f.record)) *cassette = llm::Cassette::load(f.record);
    provider = std::make_shared<llm::RecordingProvider>(provider, cassette, fs::path(f.record));
  }
  return std::make_unique<llm::Gateway>(provider, gateway_options(config.provider));
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_text_file(p, j.dump(2) + "\n");
}

}  // namespace kexplain::cli
