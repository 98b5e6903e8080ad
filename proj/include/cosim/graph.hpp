#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cosim {

/// "<sid>.<eid>"
std::string full_id(const std::string& sid, const std::string& eid);
/// Splits at the first '.'; throws ScenarioError when there is none.
std::pair<std::string, std::string> split_full_id(const std::string& full);

struct Connection {
  std::string src;  // full id
  std::string src_attr;
  std::string dest;  // full id
  std::string dest_attr;
  bool weak = false;

  std::string src_sid() const { return split_full_id(src).first; }
  std::string dest_sid() const { return split_full_id(dest).first; }

  friend bool operator==(const Connection&, const Connection&) = default;
};

/// Simulator-level view of the attribute connections. Ranks are longest-path
/// levels in the graph without weak edges, so every strong edge goes from a
/// lower to a higher rank.
class DependencyGraph {
 public:
  DependencyGraph() = default;

  /// Validates and ranks. Throws ScenarioError naming the simulators of a
  /// cycle that contains no weak connection.
  DependencyGraph(std::vector<std::string> sids, std::vector<Connection> connections);

  const std::vector<std::string>& sids() const { return sids_; }
  const std::vector<Connection>& connections() const { return connections_; }
  int rank(const std::string& sid) const;

  /// Direct predecessors over all (strong and weak) edges.
  const std::set<std::string>& parents(const std::string& sid) const;
  /// Transitive predecessors over all edges. Contains `sid` itself iff it
  /// lies on a cycle.
  std::set<std::string> ancestors(const std::string& sid) const;
  /// Strongly connected component containing `sid` (over all edges).
  std::vector<std::string> component(const std::string& sid) const;

 private:
  std::vector<std::string> sids_;
  std::vector<Connection> connections_;
  std::map<std::string, int> rank_;
  std::map<std::string, std::set<std::string>> parents_;
  std::map<std::string, std::set<std::string>> children_;
};

}  // namespace cosim
