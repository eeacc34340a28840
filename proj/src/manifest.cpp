/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#include "vectionary/manifest.hpp"

#include "json.hpp"

#include "vectionary/io_util.hpp"

namespace vectionary {

using nlohmann::json;

void Manifest::add_input(const std::string& path) {
  inputs.emplace_back(path, hex64(digest_file(path)));
}

void Manifest::add_output(const std::string& path) {
  outputs.emplace_back(path, hex64(digest_file(path)));
}

std::string Manifest::to_json() const {
  json j;
  j["tool"] = "vectionary";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config_digest"] = config_digest;
  j["config"] = config_canonical;
  auto files = [](const std::vector<std::pair<std::string, std::string>>& entries) {
    json arr = json::array();
    for (const auto& [path, digest] : entries) {
      arr.push_back({{"path", path}, {"fnv1a64", digest}});
    }
    return arr;
  };
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

void Manifest::save(const std::string& path) const { write_file(path, to_json()); }

}  // namespace vectionary
