#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kexplain/llm.hpp"
#include "kexplain/pipeline.hpp"

namespace kexplain::cli {

enum ExitCode { kOk = 0, kError = 1, kDegraded = 2 };

/// Provider selection shared by every command that talks to a model.
struct ProviderFlags {
  std::string config;
  std::string kind;
  std::string endpoint;
  std::string model;
  std::string responses;
  std::string replay;
  std::string record;
  std::string assets;
};

void add_provider_flags(CLI::App& cmd, ProviderFlags& flags);

/// Config file (if any) with the provider flags applied on top.
PipelineConfig resolve_config(const ProviderFlags& flags);

/// Gateway for the configured provider, wrapped for recording when
/// `--record` is given.
std::unique_ptr<llm::Gateway> make_gateway(const PipelineConfig& config, const ProviderFlags& flags);

void write_json_file(const std::string& path, const nlohmann::json& j);

void register_explain(CLI::App& app, int& exit_code);
void register_eval(CLI::App& app, int& exit_code);
void register_inspect(CLI::App& app, int& exit_code);

}  // namespace kexplain::cli
