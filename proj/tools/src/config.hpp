#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace pkcli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& algorithm_names();

struct Diagnostic {
  int line = 1;
  std::string message;
};

/// A parsed configuration document together with its source text, kept so
/// that problems can be reported against line numbers.
struct ConfigDocument {
  std::string path;
  std::string text;
  Json json;
};

/// Reads and parses a JSON config. Syntax errors are reported with the line
/// on which the parser stopped.
ConfigDocument load_config(const std::string& path, std::vector<Diagnostic>& problems);

/// Schema checks. An empty result means the document is valid.
std::vector<Diagnostic> validate_config(const ConfigDocument& doc);

/// "path:line: message" lines.
std::string format_diagnostics(const std::string& path, const std::vector<Diagnostic>& problems);

/// Fills defaults for every optional field.
Json with_defaults(const Json& config);

}  // namespace pkcli
