#ifndef FEDMR_MANIFEST_HPP
#define FEDMR_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedmr/config.hpp"

namespace fedmr {

inline constexpr const char* kVersion = "1.0.0";

// Everything a run's outputs depend on. Two runs with equal manifests write
// byte-identical result files; wall_clock_s is bookkeeping and stays outside
// the hash.
struct RunManifest {
  std::string config_hash;
  std::string config_text;       // full serialized config, reruns the job
  double generation_scale = 1;   // calibration constant applied to generation
  std::string version = kVersion;
  double newton_tol = 0;
  double cg_tol = 0;
  double depletion_threshold = 0;
  std::vector<std::uint64_t> seeds;  // one per sweep, derived from the config
  double wall_clock_s = 0;
};

RunManifest make_manifest(const Config& cfg, double generation_scale,
                          int n_sweeps);

// Hash of every field except wall_clock_s; embedded in each result file.
std::string manifest_hash(const RunManifest& m);

// Sidecar JSON: the manifest, its hash, and a content hash per result file.
using FileHashes = std::vector<std::pair<std::string, std::string>>;
std::string sidecar_json(const RunManifest& m, const FileHashes& files);

// Parsed sidecar. stored_hash is returned as written, not checked against
// the fields; the verify command owns that comparison.
struct Sidecar {
  RunManifest manifest;
  std::string stored_hash;
  FileHashes files;
};
Sidecar read_sidecar(const std::string& json_text);

}  // namespace fedmr

#endif
