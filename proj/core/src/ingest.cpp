#include "kexplain/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kexplain/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace kexplain {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

/// Unquoted fields lose surrounding blanks; quoted fields are kept verbatim.
std::string field_text(const csv::Record& r, std::size_t i) {
  return r.quoted[i] ? r.fields[i] : trim(r.fields[i]);
}

bool header_matches(const csv::Record& r, std::initializer_list<const char*> names) {
  if (r.fields.size() != names.size()) return false;
  std::size_t i = 0;
  for (const char* n : names) {
    if (trim(r.fields[i++]) != n) return false;
  }
  return true;
}

}  // namespace

MissingManifest::MissingManifest(const fs::path& dir)
    : IngestError("missing manifest.json in bundle directory " + dir.string()) {}

ManifestSchema::ManifestSchema(std::vector<std::string> violations)
    : IngestError("bundle manifest/schema violation: " + join(violations, "; ")),
      violations_(std::move(violations)) {}

ProfileParse::ProfileParse(std::string file, int line, const std::string& reason)
    : IngestError("cannot parse profile " + file + ":" + std::to_string(line) + ": " + reason),
      file_(std::move(file)),
      line_(line) {}

UnreadableSource::UnreadableSource(std::string path)
    : IngestError("unreadable source file " + path) {}

CsvSyntax::CsvSyntax(int line, const std::string& reason)
    : IngestError("CSV syntax error on line " + std::to_string(line) + ": " + reason),
      line_(line) {}

DuplicateMetric::DuplicateMetric(std::string name)
    : IngestError("duplicate metric '" + name + "'"), name_(std::move(name)) {}

NonPositiveLine::NonPositiveLine(int row)
    : IngestError("non-positive source line number in CSV row " + std::to_string(row)),
      row_(row) {}

SchemaViolation::SchemaViolation(std::string path, const std::string& reason)
    : IngestError("bundle schema violation at " + path + ": " + reason), path_(std::move(path)) {}

// ---------------------------------------------------------------------------
// CSV

std::vector<MetricValue> parse_metrics_csv(std::string_view text) {
  auto records = csv::parse(text);
  std::vector<MetricValue> out;
  if (records.empty()) return out;
  if (!header_matches(records.front(), {"metric", "unit", "value"})) {
    throw CsvSyntax(records.front().line, "expected header 'metric,unit,value'");
  }
  std::set<std::string> seen;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.fields.size() != 3) {
      throw CsvSyntax(r.line, "expected 3 fields, found " + std::to_string(r.fields.size()));
    }
    std::string name = field_text(r, 0);
    if (name.empty()) throw CsvSyntax(r.line, "empty metric name");
    if (!seen.insert(name).second) throw DuplicateMetric(name);
    std::string unit = field_text(r, 1);
    out.push_back(make_metric(std::move(name),
                              unit.empty() ? std::nullopt : std::optional<std::string>(unit),
                              r.fields[2]));
  }
  return out;
}

std::string serialize_metrics_csv(const std::vector<MetricValue>& metrics) {
  std::string out = "metric,unit,value\n";
  for (const auto& m : metrics) {
    out += csv::join_row({m.name, m.unit.value_or(""), m.value_text()});
    out.push_back('\n');
  }
  return out;
}

std::vector<LineRecord> parse_line_csv(std::string_view text) {
  auto records = csv::parse(text);
  std::vector<LineRecord> out;
  if (records.empty()) return out;
  if (!header_matches(records.front(), {"file", "line", "metric", "value"})) {
    throw CsvSyntax(records.front().line, "expected header 'file,line,metric,value'");
  }
  std::map<std::pair<std::string, int>, std::size_t> index;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.fields.size() != 4) {
      throw CsvSyntax(r.line, "expected 4 fields, found " + std::to_string(r.fields.size()));
    }
    std::string file = field_text(r, 0);
    auto line = parse_profiler_number(r.fields[1]);
    if (!line || *line != static_cast<double>(static_cast<long long>(*line))) {
      throw CsvSyntax(r.line, "line column is not an integer");
    }
    if (*line < 1) throw NonPositiveLine(r.line);
    auto value = parse_profiler_number(r.fields[3]);
    if (!value) throw CsvSyntax(r.line, "metric value is not numeric");
    std::string metric = field_text(r, 2);
    if (metric.empty()) throw CsvSyntax(r.line, "empty metric name");

    auto key = std::make_pair(file, static_cast<int>(*line));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      LineRecord rec;
      rec.file = file;
      rec.line = key.second;
      out.push_back(std::move(rec));
    }
    out[it->second].metrics[metric] = *value;
  }
  return out;
}

std::string serialize_line_csv(const std::vector<LineRecord>& records) {
  std::string out = "file,line,metric,value\n";
  for (const auto& r : records) {
    for (const auto& [name, value] : r.metrics) {
      MetricValue tmp{name, value, std::nullopt, MetricKind::counter, false};
      out += csv::join_row({r.file, std::to_string(r.line), name, tmp.value_text()});
      out.push_back('\n');
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void mark_external_lines(ProfileBundle& bundle) {
  std::set<std::string> paths;
  for (const auto& s : bundle.sources) paths.insert(s.path);
  for (auto& p : bundle.profiles) {
    if (!p.line_records) continue;
    for (auto& r : *p.line_records) r.external = !paths.count(r.file);
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaViolation(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaViolation(path + "/" + key, "required field missing");
  return *it;
}

std::string require_string(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaViolation(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

const json& require_array(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_array()) throw SchemaViolation(path + "/" + key, "expected an array");
  return v;
}

KnobValue knob_from_json(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw SchemaViolation(path, "knob value must be a number or a string");
}

json knob_to_json(const KnobValue& v) {
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  return std::get<std::string>(v);
}

std::vector<KnobSpec> knobs_from_json(const json& arr, const std::string& path) {
  std::vector<KnobSpec> knobs;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    KnobSpec k;
    k.name = require_string(arr[i], "name", p);
    std::string type = require_string(arr[i], "type", p);
    if (type == "numeric") {
      k.type = KnobType::numeric;
    } else if (type == "categorical") {
      k.type = KnobType::categorical;
    } else {
      throw SchemaViolation(p + "/type", "must be \"numeric\" or \"categorical\"");
    }
    if (auto it = arr[i].find("unit"); it != arr[i].end() && !it->is_null()) {
      if (!it->is_string()) throw SchemaViolation(p + "/unit", "expected a string");
      k.unit = it->get<std::string>();
    }
    knobs.push_back(std::move(k));
  }
  return knobs;
}

std::map<std::string, KnobValue> knob_map_from_json(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw SchemaViolation(path, "expected an object");
  std::map<std::string, KnobValue> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    out[it.key()] = knob_from_json(it.value(), path + "/" + it.key());
  }
  return out;
}

void check_declared(const std::map<std::string, KnobValue>& knobs, const BundleManifest& m,
                    const std::string& path, bool allow_arch) {
  for (const auto& [name, value] : knobs) {
    if (allow_arch && name == kGpuArchKey) continue;
    const KnobSpec* spec = m.find_knob(name);
    if (!spec) throw SchemaViolation(path + "/" + name, "knob not declared in manifest");
    if (spec->type == KnobType::numeric && !std::holds_alternative<double>(value)) {
      throw SchemaViolation(path + "/" + name, "numeric knob requires a number");
    }
  }
}

BundleManifest manifest_from_json(const json& root, const std::string& path) {
  BundleManifest m;
  m.app_name = require_string(root, "app_name", path);
  m.kernel_name = require_string(root, "kernel_name", path);
  m.knobs = knobs_from_json(require_array(root, "knobs", path), path + "/knobs");
  m.defaults = knob_map_from_json(require(root, "defaults", path), path + "/defaults");
  check_declared(m.defaults, m, path + "/defaults", true);
  return m;
}

json manifest_fields_to_json(const BundleManifest& m) {
  json j;
  j["app_name"] = m.app_name;
  j["kernel_name"] = m.kernel_name;
  j["knobs"] = json::array();
  for (const auto& k : m.knobs) {
    json kj{{"name", k.name}, {"type", k.type == KnobType::numeric ? "numeric" : "categorical"}};
    if (k.unit) kj["unit"] = *k.unit;
    j["knobs"].push_back(std::move(kj));
  }
  j["defaults"] = json::object();
  for (const auto& [name, value] : m.defaults) j["defaults"][name] = knob_to_json(value);
  return j;
}

std::vector<LineRecord> lines_from_json(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw SchemaViolation(path, "expected an array");
  std::vector<LineRecord> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    LineRecord r;
    r.file = require_string(arr[i], "file", p);
    const json& line = require(arr[i], "line", p);
    if (!line.is_number_integer()) throw SchemaViolation(p + "/line", "expected an integer");
    r.line = line.get<int>();
    if (r.line < 1) throw SchemaViolation(p + "/line", "line must be >= 1");
    const json& metrics = require(arr[i], "metrics", p);
    if (!metrics.is_object()) throw SchemaViolation(p + "/metrics", "expected an object");
    for (auto it = metrics.begin(); it != metrics.end(); ++it) {
      if (!it.value().is_number()) {
        throw SchemaViolation(p + "/metrics/" + it.key(), "expected a number");
      }
      r.metrics[it.key()] = it.value().get<double>();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

ProfileBundle parse_bundle_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw JsonSyntax(std::string("bundle JSON syntax error: ") + e.what());
  }
  if (!root.is_object()) throw SchemaViolation("", "bundle must be a JSON object");

  ProfileBundle b;
  b.manifest = manifest_from_json(root, "");

  const json& profiles = require_array(root, "profiles", "");
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const std::string p = "/profiles/" + std::to_string(i);
    const json& pj = profiles[i];
    KernelProfile kp;
    kp.id = require_string(pj, "id", p);
    kp.app_name = b.manifest.app_name;
    kp.kernel_name = b.manifest.kernel_name;
    kp.config.profile_id = kp.id;
    kp.config.gpu_arch = require_string(pj, "gpu_arch", p);
    if (auto it = pj.find("knobs"); it != pj.end()) {
      kp.config.knobs = knob_map_from_json(*it, p + "/knobs");
      check_declared(kp.config.knobs, b.manifest, p + "/knobs", false);
    }
    const json& metrics = require_array(pj, "metrics", p);
    std::set<std::string> seen;
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      const std::string mp = p + "/metrics/" + std::to_string(m);
      std::string name = require_string(metrics[m], "name", mp);
      if (!seen.insert(name).second) throw SchemaViolation(mp + "/name", "duplicate metric");
      std::optional<std::string> unit;
      if (auto it = metrics[m].find("unit"); it != metrics[m].end() && !it->is_null()) {
        if (!it->is_string()) throw SchemaViolation(mp + "/unit", "expected a string");
        unit = it->get<std::string>();
      }
      const json& value = require(metrics[m], "value", mp);
      std::string raw;
      if (value.is_number()) {
        MetricValue tmp{name, value.get<double>(), std::nullopt, MetricKind::counter, false};
        raw = tmp.value_text();
      } else if (value.is_string()) {
        raw = value.get<std::string>();
      } else {
        throw SchemaViolation(mp + "/value", "expected a number or a string");
      }
      kp.metrics.push_back(make_metric(std::move(name), std::move(unit), raw));
    }
    if (auto it = pj.find("lines"); it != pj.end() && !it->is_null()) {
      kp.line_records = lines_from_json(*it, p + "/lines");
    }
    b.profiles.push_back(std::move(kp));
  }

  const json& sources = require_array(root, "sources", "");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string p = "/sources/" + std::to_string(i);
    b.sources.push_back({require_string(sources[i], "path", p),
                         require_string(sources[i], "content", p)});
  }
  if (auto it = root.find("guidelines"); it != root.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaViolation("/guidelines", "expected a string");
    b.guidelines = it->get<std::string>();
  }

  mark_external_lines(b);
  auto violations = validate_bundle(b);
  if (!violations.empty()) throw SchemaViolation("", join(violations, "; "));
  return b;
}

json bundle_to_json(const ProfileBundle& b) {
  json j = manifest_fields_to_json(b.manifest);
  j["profiles"] = json::array();
  for (const auto& p : b.profiles) {
    json pj;
    pj["id"] = p.id;
    pj["gpu_arch"] = p.config.gpu_arch;
    pj["knobs"] = json::object();
    for (const auto& [name, value] : p.config.knobs) pj["knobs"][name] = knob_to_json(value);
    pj["metrics"] = json::array();
    for (const auto& m : p.metrics) {
      json mj;
      mj["name"] = m.name;
      mj["unit"] = m.unit ? json(*m.unit) : json(nullptr);
      if (m.is_numeric()) {
        mj["value"] = m.number();
      } else {
        mj["value"] = std::get<std::string>(m.value);
      }
      pj["metrics"].push_back(std::move(mj));
    }
    if (p.line_records) {
      pj["lines"] = json::array();
      for (const auto& r : *p.line_records) {
        json metrics = json::object();
        for (const auto& [name, value] : r.metrics) metrics[name] = value;
        pj["lines"].push_back({{"file", r.file}, {"line", r.line}, {"metrics", metrics}});
      }
    }
    j["profiles"].push_back(std::move(pj));
  }
  j["sources"] = json::array();
  for (const auto& s : b.sources) j["sources"].push_back({{"path", s.path}, {"content", s.content}});
  if (b.guidelines) j["guidelines"] = *b.guidelines;
  return j;
}

std::string serialize_bundle_json(const ProfileBundle& bundle) {
  return bundle_to_json(bundle).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Directory bundles

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error("cannot read " + path.string());
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("cannot write " + path.string());
}

namespace {

constexpr std::string_view kMetricsSuffix = ".metrics.csv";
constexpr std::string_view kLinesSuffix = ".lines.csv";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ProfileBundle load_bundle(const fs::path& dir) {
  if (fs::is_regular_file(dir)) return parse_bundle_json(read_text_file(dir));
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) throw MissingManifest(dir);

  json root;
  try {
    root = json::parse(read_text_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw ManifestSchema({std::string("manifest.json: ") + e.what()});
  }

  ProfileBundle b;
  json configs = json::object();
  try {
    b.manifest = manifest_from_json(root, "manifest.json");
    if (auto it = root.find("configs"); it != root.end()) {
      if (!it->is_object()) throw SchemaViolation("manifest.json/configs", "expected an object");
      configs = *it;
    }
  } catch (const SchemaViolation& e) {
    throw ManifestSchema({e.what()});
  }

  const fs::path profile_dir = dir / "profiles";
  if (!fs::is_directory(profile_dir)) throw ManifestSchema({"missing profiles/ directory"});
  std::vector<std::string> metric_files;
  std::set<std::string> line_files;
  for (const auto& entry : fs::directory_iterator(profile_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (ends_with(name, kMetricsSuffix)) metric_files.push_back(name);
    if (ends_with(name, kLinesSuffix)) line_files.insert(name);
  }
  std::sort(metric_files.begin(), metric_files.end());

  std::string default_arch;
  if (auto it = b.manifest.defaults.find(kGpuArchKey);
      it != b.manifest.defaults.end() && std::holds_alternative<std::string>(it->second)) {
    default_arch = std::get<std::string>(it->second);
  }

  for (const auto& file : metric_files) {
    KernelProfile kp;
    kp.id = file.substr(0, file.size() - kMetricsSuffix.size());
    kp.app_name = b.manifest.app_name;
    kp.kernel_name = b.manifest.kernel_name;
    kp.config.profile_id = kp.id;
    kp.config.gpu_arch = default_arch;
    try {
      kp.metrics = parse_metrics_csv(read_text_file(profile_dir / file));
    } catch (const CsvSyntax& e) {
      throw ProfileParse(file, e.line(), e.what());
    } catch (const DuplicateMetric& e) {
      throw ProfileParse(file, 0, e.what());
    }
    if (auto it = configs.find(kp.id); it != configs.end()) {
      const std::string p = "manifest.json/configs/" + kp.id;
      try {
        if (auto arch = it->find("gpu_arch"); arch != it->end()) {
          if (!arch->is_string()) throw SchemaViolation(p + "/gpu_arch", "expected a string");
          kp.config.gpu_arch = arch->get<std::string>();
        }
        if (auto knobs = it->find("knobs"); knobs != it->end()) {
          kp.config.knobs = knob_map_from_json(*knobs, p + "/knobs");
          check_declared(kp.config.knobs, b.manifest, p + "/knobs", false);
        }
      } catch (const SchemaViolation& e) {
        throw ManifestSchema({e.what()});
      }
    } else {
      for (const auto& k : b.manifest.knobs) {
        if (auto d = b.manifest.defaults.find(k.name); d != b.manifest.defaults.end()) {
          kp.config.knobs[k.name] = d->second;
        }
      }
    }
    const std::string lines_name = kp.id + std::string(kLinesSuffix);
    if (line_files.erase(lines_name)) {
      try {
        kp.line_records = parse_line_csv(read_text_file(profile_dir / lines_name));
      } catch (const CsvSyntax& e) {
        throw ProfileParse(lines_name, e.line(), e.what());
      } catch (const NonPositiveLine& e) {
        throw ProfileParse(lines_name, e.row(), e.what());
      }
    }
    b.profiles.push_back(std::move(kp));
  }
  if (!line_files.empty()) {
    throw ProfileParse(*line_files.begin(), 0, "line-level CSV without matching metrics file");
  }
  for (auto it = configs.begin(); it != configs.end(); ++it) {
    if (!b.find_profile(it.key())) {
      throw ManifestSchema({"manifest.json/configs: no profile file for '" + it.key() + "'"});
    }
  }

  const fs::path src_dir = dir / "src";
  if (!fs::is_directory(src_dir)) throw ManifestSchema({"missing src/ directory"});
  for (const auto& entry : fs::recursive_directory_iterator(src_dir)) {
    if (entry.is_directory()) continue;
    std::string rel = fs::relative(entry.path(), src_dir).generic_string();
    std::string content;
    try {
      content = read_text_file(entry.path());
    } catch (const Error&) {
      throw UnreadableSource(rel);
    }
    b.sources.push_back({rel, std::move(content)});
  }
  std::sort(b.sources.begin(), b.sources.end(),
            [](const SourceFile& a, const SourceFile& c) { return a.path < c.path; });

  if (fs::is_regular_file(dir / "guidelines.md")) {
    b.guidelines = read_text_file(dir / "guidelines.md");
  }

  mark_external_lines(b);
  auto violations = validate_bundle(b);
  if (!violations.empty()) throw ManifestSchema(std::move(violations));
  return b;
}

void write_bundle_dir(const ProfileBundle& b, const fs::path& dir) {
  json manifest = manifest_fields_to_json(b.manifest);
  manifest["configs"] = json::object();
  for (const auto& p : b.profiles) {
    json knobs = json::object();
    for (const auto& [name, value] : p.config.knobs) knobs[name] = knob_to_json(value);
    manifest["configs"][p.id] = {{"gpu_arch", p.config.gpu_arch}, {"knobs", knobs}};
  }
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  fs::create_directories(dir / "profiles");
  for (const auto& p : b.profiles) {
    write_text_file(dir / "profiles" / (p.id + std::string(kMetricsSuffix)),
                    serialize_metrics_csv(p.metrics));
    if (p.line_records) {
      write_text_file(dir / "profiles" / (p.id + std::string(kLinesSuffix)),
                      serialize_line_csv(*p.line_records));
    }
  }
  for (const auto& s : b.sources) write_text_file(dir / "src" / s.path, s.content);
  if (b.guidelines) write_text_file(dir / "guidelines.md", *b.guidelines);
}

ProfileBundle subset_profiles(const ProfileBundle& bundle, const std::vector<std::string>& ids) {
  std::set<std::string> keep(ids.begin(), ids.end());
  ProfileBundle out = bundle;
  out.profiles.clear();
  for (const auto& p : bundle.profiles) {
    if (keep.count(p.id)) out.profiles.push_back(p);
  }
  return out;
}

}  // namespace kexplain
