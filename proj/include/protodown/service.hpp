#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "protodown/serialize.hpp"

namespace protodown::service {

using serialize::json;

inline constexpr int kSchemaVersion = 1;
std::string_view engine_version();

enum class Stage { ingest, preprocess, qc, diffexpr, enrich, ppi };
inline constexpr Stage kStages[] = {Stage::ingest, Stage::preprocess, Stage::qc,
                                    Stage::diffexpr, Stage::enrich, Stage::ppi};
std::string_view to_string(Stage s);

/// Parameter groups a client can replace.
enum class Section { design, preprocess, test, enrich, ppi };
std::string_view to_string(Section s);
Section parse_section(std::string_view text);  // throws NotFoundError

std::string sha256_hex(std::string_view bytes);

struct Inputs {
  std::string main;
  std::optional<std::string> report;
  ingest::IngestConfig config;
};

struct Params {
  GroupDesign design;
  preprocess::PreprocessParams preprocess;
  diffexpr::TestConfig test;
  std::optional<serialize::EnrichParams> enrich;
  std::optional<ppi::PpiConfig> ppi;
};

struct Options {
  bool eager = false;
  std::size_t max_upload_bytes = std::size_t(512) << 20;
  std::optional<std::filesystem::path> persist_dir;
  std::chrono::seconds idle_ttl = std::chrono::hours(24);
};

struct Export {
  std::string body;
  std::string media_type;
  std::string filename;
};

struct Report {
  std::vector<Stage> invalidated;
  std::vector<Stage> recomputed;
  json to_json() const;
};

using Query = std::map<std::string, std::string>;

/// One analysis: inputs, parameters and a hash-verified cache of stage
/// results. Mutations are serialized; reads share a lock and compute
/// missing stages on demand.
class Session {
 public:
  /// Parses the inputs; throws on fatal ingest errors.
  Session(std::string id, Inputs inputs, Options options);
  ~Session();

  const std::string& id() const { return id_; }

  json summary() const;
  json describe() const;
  Params params() const;
  std::map<Stage, std::string> stage_hashes() const;

  /// Replaces one parameter group; all-or-nothing.
  Report update(Section section, const json& body);

  /// JSON envelope {schema_version, artifact, stage, stage_hash, data}.
  std::string payload(const std::string& artifact, const Query& query = {});
  Export export_artifact(const std::string& artifact, const std::string& format, const Query& query = {});

  /// Full parameter and hash record, free of timestamps.
  json manifest() const;

  std::chrono::steady_clock::time_point last_access() const;
  void touch();

  /// Writes session.json and inputs under dir/<id>.
  void persist() const;
  static std::shared_ptr<Session> restore(const std::filesystem::path& dir, Options options);

  struct Cache;
  struct PreprocessStage;
  struct EnrichStage;
  struct Built;

 private:
  std::shared_ptr<const ingest::IngestResult> ingest_stage();
  std::shared_ptr<const PreprocessStage> preprocess_stage();
  std::shared_ptr<const diffexpr::DiffResult> diff_stage();
  std::shared_ptr<const EnrichStage> enrich_stage();
  std::shared_ptr<const ppi::DiffNetworks> ppi_stage();
  Built build(const std::string& artifact, const Query& query);
  void write_stage(Stage stage, const std::string& hash, const std::string& body) const;

  std::map<Stage, std::string> hashes_for(const Params& p) const;
  void checkpoint() const;
  void recompute_all();

  std::string id_;
  Inputs inputs_;
  Options options_;
  Params params_;
  std::string input_digest_;
  std::string created_;
  std::string updated_;

  mutable std::shared_mutex rw_;
  std::mutex compute_;
  std::atomic<int> pending_{0};
  std::unique_ptr<Cache> cache_;
  mutable std::mutex access_mutex_;
  std::chrono::steady_clock::time_point last_access_;
};

class SessionStore {
 public:
  explicit SessionStore(Options options = {});

  std::shared_ptr<Session> create(Inputs inputs);
  std::shared_ptr<Session> get(const std::string& id);  // NotFoundError
  void remove(const std::string& id);
  std::size_t size() const;
  /// Drops sessions idle longer than the ttl; returns how many.
  std::size_t expire_idle();
  /// Re-opens sessions written under the persist directory.
  std::size_t load_persisted();

  const Options& options() const { return options_; }

 private:
  Options options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// Options from PROTODOWN_SESSION_DIR / PROTODOWN_EAGER.
Options options_from_env();

}  // namespace protodown::service
