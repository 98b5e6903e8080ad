#include "cosim/graph.hpp"

#include <algorithm>
#include <functional>

#include "cosim/errors.hpp"

namespace cosim {

std::string full_id(const std::string& sid, const std::string& eid) { return sid + "." + eid; }

std::pair<std::string, std::string> split_full_id(const std::string& full) {
  auto dot = full.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == full.size()) {
    throw ScenarioError("'" + full + "' is not a full entity id of the form <sid>.<eid>");
  }
  return {full.substr(0, dot), full.substr(dot + 1)};
}

DependencyGraph::DependencyGraph(std::vector<std::string> sids, std::vector<Connection> connections)
    : sids_(std::move(sids)), connections_(std::move(connections)) {
  std::map<std::string, std::set<std::string>> strong_children;
  for (const auto& sid : sids_) {
    parents_[sid];
    children_[sid];
    strong_children[sid];
  }
  for (const auto& c : connections_) {
    const auto src = c.src_sid();
    const auto dest = c.dest_sid();
    if (!parents_.count(src)) throw ScenarioError("connection from unknown simulator '" + src + "'");
    if (!parents_.count(dest)) throw ScenarioError("connection to unknown simulator '" + dest + "'");
    parents_[dest].insert(src);
    children_[src].insert(dest);
    if (!c.weak) strong_children[src].insert(dest);
  }

  // Depth-first search over strong edges; a back edge is a cycle without a
  // weak connection.
  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> mark;
  std::vector<std::string> stack;
  std::vector<std::string> order;
  std::function<void(const std::string&)> visit = [&](const std::string& sid) {
    mark[sid] = Mark::Grey;
    stack.push_back(sid);
    for (const auto& next : strong_children[sid]) {
      if (mark[next] == Mark::Grey) {
        auto from = std::find(stack.begin(), stack.end(), next);
        std::string cycle;
        for (auto it = from; it != stack.end(); ++it) cycle += *it + " -> ";
        cycle += next;
        throw ScenarioError("cycle without a weak connection: " + cycle);
      }
      if (mark[next] == Mark::White) visit(next);
    }
    stack.pop_back();
    mark[sid] = Mark::Black;
    order.push_back(sid);
  };
  for (const auto& sid : sids_) {
    if (mark[sid] == Mark::White) visit(sid);
  }

  // Reverse post-order is topological; relax longest paths along it.
  std::reverse(order.begin(), order.end());
  for (const auto& sid : sids_) rank_[sid] = 0;
  for (const auto& sid : order) {
    for (const auto& next : strong_children[sid]) rank_[next] = std::max(rank_[next], rank_[sid] + 1);
  }
}

int DependencyGraph::rank(const std::string& sid) const {
  auto it = rank_.find(sid);
  if (it == rank_.end()) throw ScenarioError("unknown simulator '" + sid + "'");
  return it->second;
}

const std::set<std::string>& DependencyGraph::parents(const std::string& sid) const {
  auto it = parents_.find(sid);
  if (it == parents_.end()) throw ScenarioError("unknown simulator '" + sid + "'");
  return it->second;
}

std::set<std::string> DependencyGraph::ancestors(const std::string& sid) const {
  std::set<std::string> seen;
  std::vector<std::string> todo(parents(sid).begin(), parents(sid).end());
  while (!todo.empty()) {
    auto cur = std::move(todo.back());
    todo.pop_back();
    if (!seen.insert(cur).second) continue;
    for (const auto& p : parents_.at(cur)) todo.push_back(p);
  }
  return seen;
}

std::vector<std::string> DependencyGraph::component(const std::string& sid) const {
  auto up = ancestors(sid);
  std::vector<std::string> out{sid};
  for (const auto& other : sids_) {
    if (other == sid || !up.count(other)) continue;
    if (ancestors(other).count(sid)) out.push_back(other);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cosim
