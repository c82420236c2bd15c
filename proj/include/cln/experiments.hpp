#pragma once

#include <functional>
#include <string>

#include "json.hpp"

#include "cln/normalsets.hpp"
#include "cln/snlab.hpp"

namespace cln {

inline constexpr const char* kVersionTag = "cln-0.1.0";

/// Runs fn(0..tasks-1) on up to `threads` workers. Task indices are the
/// only coupling, so results land deterministically regardless of
/// scheduling.
void parallel_for(unsigned tasks, unsigned threads,
                  const std::function<void(unsigned)>& fn);

/// Key-value experiment configuration (a single JSON object). Unknown keys
/// are rejected with a message naming the key; the canonical serialization
/// (sorted keys) feeds the config hash.
class ExperimentConfig {
 public:
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load_file(const std::string& path);
  static ExperimentConfig from_text(const std::string& text);

  const std::string& experiment() const { return experiment_; }
  std::string canonical_text() const;
  u64 hash() const;  // FNV-1a of the canonical text

  bool has(const std::string& key) const { return j_.contains(key); }
  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!j_.contains(key)) return fallback;
    return j_.at(key).get<T>();
  }
  template <typename T>
  T require(const std::string& key) const {
    if (!j_.contains(key))
      throw ClnError("config: missing required key '" + key + "' for " +
                     experiment_);
    return j_.at(key).get<T>();
  }
  const nlohmann::json& raw() const { return j_; }

 private:
  nlohmann::json j_;
  std::string experiment_;
};

struct ExperimentResult {
  u64 config_hash = 0;
  std::string jsonl_path, csv_path, meta_path;
  nlohmann::json summary;   // printed and stored in meta
  double wall_seconds = 0;  // not part of the deterministic outputs
};

/// Executes the named experiment (return-prob, lambda, xwz-search,
/// cd-density, supp-tail, sn-pipeline, diameter-bfs, witt-count-check) and
/// persists a JSONL raw file plus a CSV summary; both are byte-identical
/// across reruns of the same (config, seed). Wall-clock and the version tag
/// go to the meta file only.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& output_root = "");

}  // namespace cln
