/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <string>
#include <vector>

namespace vectionary {

inline constexpr const char* kToolVersion = "0.1.0";

/**
 * Reproduction record written next to every command's outputs. Contains no
 * clocks or host identifiers: identical inputs and settings produce a
 * byte-identical manifest. Digests are 64-bit FNV-1a (integrity breadcrumbs,
 * not cryptographic).
 */
struct Manifest {
  std::string command;
  std::string config_digest;     // over the canonical resolved config text
  std::string config_canonical;  // the resolved key = value dump itself
  std::vector<std::pair<std::string, std::string>> inputs;   // (path, digest)
  std::vector<std::pair<std::string, std::string>> outputs;  // (path, digest)
  std::string seed;  // empty when the command draws no randomness

  void add_input(const std::string& path);
  void add_output(const std::string& path);

  std::string to_json() const;
  void save(const std::string& path) const;
};

}  // namespace vectionary
