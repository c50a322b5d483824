#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "protodown/diffexpr.hpp"
#include "protodown/transport.hpp"

namespace protodown::ppi {

struct PpiConfig {
  int taxon_id = 9606;
  int required_score = 400;
  std::string endpoint_base = "https://string-db.org";
  double timeout_s = 30.0;
  std::optional<std::string> offline_fixture;
  bool include_exclusives = true;

  /// Base URL from PROTODOWN_STRING_BASE when set.
  static PpiConfig from_env();
  void validate() const;
  friend bool operator==(const PpiConfig&, const PpiConfig&) = default;
};

struct Node {
  std::string query_id;
  std::string resolved_id;
  std::string preferred_name;
  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string node_a;  // resolved ids
  std::string node_b;
  int combined_score = 0;
  std::map<std::string, double> sub_scores;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct PpiNetwork {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::string> unresolved_ids;
  std::vector<std::string> notices;

  /// Throws StateError when an invariant is broken.
  void check(int required_score) const;
  friend bool operator==(const PpiNetwork&, const PpiNetwork&) = default;
};

struct Resolution {
  std::vector<Node> resolved;  // input order, one per resolved query id
  std::vector<std::string> unresolved;
};

/// 0-1 reals scale by 1000; round half-up to an integer.
int scale_score(double raw);

Resolution resolve_ids(const std::vector<std::string>& ids, const PpiConfig& cfg, transport::Transport& transport);

/// Needs at least two resolved nodes.
PpiNetwork fetch_network(const Resolution& resolved, const PpiConfig& cfg, transport::Transport& transport);

/// Resolve + fetch; empty or single-id sets give a network with a notice.
PpiNetwork network_for(const std::vector<std::string>& ids, const PpiConfig& cfg, transport::Transport& transport);

struct DiffNetworks {
  PpiNetwork up;
  PpiNetwork down;
};

std::vector<std::string> up_set(const std::vector<diffexpr::DiffRow>& rows, bool include_exclusives);
std::vector<std::string> down_set(const std::vector<diffexpr::DiffRow>& rows, bool include_exclusives);

/// Up and down run concurrently. Errors name the failing set.
DiffNetworks networks_for_diff(const std::vector<diffexpr::DiffRow>& rows, const PpiConfig& cfg,
                               transport::Transport& transport);

/// Fixture transport when offline_fixture is set, live HTTP otherwise.
std::shared_ptr<transport::Transport> make_transport(const PpiConfig& cfg);

std::string to_json(const PpiNetwork& net);

}  // namespace protodown::ppi
