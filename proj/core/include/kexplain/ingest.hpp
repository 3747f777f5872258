#pragma once

// Parsers for profiler exports and the canonical bundle formats.
//
// Bundle directory layout:
//   manifest.json                 app/kernel names, knob schema, defaults and
//                                 per-profile run configurations
//   profiles/<id>.metrics.csv     `metric,unit,value`
//   profiles/<id>.lines.csv       optional, `file,line,metric,value`
//   src/**                        kernel sources
//   guidelines.md                 optional analysis-guidelines override

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/errors.hpp"
#include "kexplain/model.hpp"

namespace kexplain {

class IngestError : public Error {
 public:
  using Error::Error;
};

class MissingManifest : public IngestError {
 public:
  explicit MissingManifest(const std::filesystem::path& dir);
};

class ManifestSchema : public IngestError {
 public:
  explicit ManifestSchema(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class ProfileParse : public IngestError {
 public:
  ProfileParse(std::string file, int line, const std::string& reason);
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

class UnreadableSource : public IngestError {
 public:
  explicit UnreadableSource(std::string path);
};

class CsvSyntax : public IngestError {
 public:
  CsvSyntax(int line, const std::string& reason);
  int line() const { return line_; }

 private:
  int line_;
};

class DuplicateMetric : public IngestError {
 public:
  explicit DuplicateMetric(std::string name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class NonPositiveLine : public IngestError {
 public:
  explicit NonPositiveLine(int row);
  int row() const { return row_; }

 private:
  int row_;
};

class JsonSyntax : public IngestError {
 public:
  using IngestError::IngestError;
};

class SchemaViolation : public IngestError {
 public:
  SchemaViolation(std::string path, const std::string& reason);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::vector<MetricValue> parse_metrics_csv(std::string_view text);
std::string serialize_metrics_csv(const std::vector<MetricValue>& metrics);

std::vector<LineRecord> parse_line_csv(std::string_view text);
std::string serialize_line_csv(const std::vector<LineRecord>& records);

ProfileBundle parse_bundle_json(std::string_view text);
nlohmann::json bundle_to_json(const ProfileBundle& bundle);
std::string serialize_bundle_json(const ProfileBundle& bundle);

/// Loads a bundle directory, or a single bundle JSON file when `path` names
/// a regular file.
ProfileBundle load_bundle(const std::filesystem::path& path);

/// Writes `bundle` in the directory layout. The directory is created if
/// needed; existing files with the same names are overwritten.
void write_bundle_dir(const ProfileBundle& bundle, const std::filesystem::path& dir);

/// Restricts a bundle to the given profile ids, keeping bundle order.
ProfileBundle subset_profiles(const ProfileBundle& bundle, const std::vector<std::string>& ids);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace kexplain
