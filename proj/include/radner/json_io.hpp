#pragma once

#include <json.hpp>

#include <string>

namespace radner {

using Json = nlohmann::ordered_json;

/// Pretty-printed JSON with every float written as %.17g and non-finite
/// floats as null. Output depends only on the document.
std::string dump_json(const Json &doc);

/// Writes dump_json(doc) to `path`, replacing the file.
void write_json_file(const std::string &path, const Json &doc);

Json read_json_file(const std::string &path);

} // namespace radner
