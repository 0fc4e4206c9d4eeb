#include "fedmr/manifest.hpp"

#include <json.hpp>

#include "fedmr/csvio.hpp"

namespace fedmr {

namespace {

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

RunManifest make_manifest(const Config& cfg, double generation_scale,
                          int n_sweeps) {
  RunManifest m;
  m.config_hash = config_hash(cfg);
  m.config_text = serialize_config(cfg);
  m.generation_scale = generation_scale;
  m.newton_tol = cfg.solver.newton_tol;
  m.cg_tol = cfg.solver.cg_tol;
  m.depletion_threshold = cfg.solver.depletion_threshold;
  // Seeds are spent only by stochastic extensions (noise injection and the
  // like); deriving them from the config keeps reruns reproducible.
  std::uint64_t h = fnv1a(m.config_hash, 1469598103934665603ull);
  for (int i = 0; i < n_sweeps; ++i) {
    h ^= static_cast<std::uint64_t>(i);
    h *= 1099511628211ull;
    m.seeds.push_back(h);
  }
  return m;
}

std::string manifest_hash(const RunManifest& m) {
  // Canonical field-by-field preimage; JSON formatting never enters the hash.
  std::string pre = m.config_hash + '\n' + m.config_text + '\n' +
                    csv_num(m.generation_scale) + '\n' + m.version + '\n' +
                    csv_num(m.newton_tol) + '\n' + csv_num(m.cg_tol) + '\n' +
                    csv_num(m.depletion_threshold) + '\n';
  for (std::uint64_t s : m.seeds) pre += std::to_string(s) + '\n';
  return fnv1a_hex(pre);
}

std::string sidecar_json(const RunManifest& m, const FileHashes& files) {
  nlohmann::json j;
  j["manifest"]["config_hash"] = m.config_hash;
  j["manifest"]["config_text"] = m.config_text;
  j["manifest"]["generation_scale"] = m.generation_scale;
  j["manifest"]["version"] = m.version;
  j["manifest"]["newton_tol"] = m.newton_tol;
  j["manifest"]["cg_tol"] = m.cg_tol;
  j["manifest"]["depletion_threshold"] = m.depletion_threshold;
  j["manifest"]["seeds"] = m.seeds;
  j["manifest"]["wall_clock_s"] = m.wall_clock_s;
  j["manifest_hash"] = manifest_hash(m);
  auto& jf = j["files"] = nlohmann::json::object();
  for (const auto& [name, hash] : files) jf[name] = hash;
  return j.dump(2) + "\n";
}

Sidecar read_sidecar(const std::string& json_text) {
  Sidecar sc;
  try {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    const auto& jm = j.at("manifest");
    RunManifest& m = sc.manifest;
    m.config_hash = jm.at("config_hash").get<std::string>();
    m.config_text = jm.at("config_text").get<std::string>();
    m.generation_scale = jm.at("generation_scale").get<double>();
    m.version = jm.at("version").get<std::string>();
    m.newton_tol = jm.at("newton_tol").get<double>();
    m.cg_tol = jm.at("cg_tol").get<double>();
    m.depletion_threshold = jm.at("depletion_threshold").get<double>();
    m.seeds = jm.at("seeds").get<std::vector<std::uint64_t>>();
    m.wall_clock_s = jm.at("wall_clock_s").get<double>();
    for (const auto& [name, hash] : j.at("files").items())
      sc.files.emplace_back(name, hash.get<std::string>());
    sc.stored_hash = j.at("manifest_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sidecar: ") + e.what());
  }
  return sc;
}

}  // namespace fedmr
