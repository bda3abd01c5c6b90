#include "htnagent/unit_movement.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>

#include <json.hpp>

#include "htnagent/errors.hpp"
#include "htnagent/resources.hpp"
#include "htnagent/rng.hpp"
#include "htnagent/text.hpp"

namespace htnagent::um {

std::optional<int> Instance::node_index(std::string_view name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

bool Instance::adjacent(int a, int b) const {
  const auto& row = adj.at(static_cast<std::size_t>(a));
  return std::find(row.begin(), row.end(), b) != row.end();
}

std::size_t Instance::edge_count() const {
  std::size_t twice = 0;
  for (const auto& row : adj) twice += row.size();
  return twice / 2;
}

namespace {

std::vector<std::string> load_pool(std::string_view resource) {
  std::vector<std::string> out;
  for (const auto& line : text::split_lines(resources::get(resource))) {
    auto t = text::trim(line);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

void connect(Instance& inst, int a, int b) {
  inst.adj[static_cast<std::size_t>(a)].push_back(b);
  inst.adj[static_cast<std::size_t>(b)].push_back(a);
}

}  // namespace

const std::vector<std::string>& place_pool() {
  static const std::vector<std::string> pool = load_pool("data/place_names.txt");
  return pool;
}

const std::vector<std::string>& group_pool() {
  static const std::vector<std::string> pool = load_pool("data/group_names.txt");
  return pool;
}

bool likely_unsolvable(int n, int k) { return 3 * n < 3 * k; }

Instance generate(int n, int k, std::uint64_t seed) {
  if (n < 1 || k < 1) throw InvalidArgument("n and k must be at least 1");
  const std::size_t node_count = 1 + kSections + kSections * kOutersPerSection;
  if (place_pool().size() < node_count) throw InvalidArgument("name pool exhausted: places");
  if (group_pool().size() < kSections - 1) throw InvalidArgument("name pool exhausted: groups");

  Rng rng(seed);
  Instance inst;
  inst.n = n;
  inst.k = k;
  inst.nodes = rng.sample(place_pool(), node_count);
  inst.adj.assign(node_count, {});
  for (int s = 0; s < kSections; ++s) connect(inst, Instance::target(), Instance::neighbor(s));
  for (int s = 0; s < kSections; ++s) {
    for (int j = 0; j < kOutersPerSection; ++j) connect(inst, Instance::neighbor(s), Instance::outer(s, j));
  }

  std::vector<std::pair<int, int>> candidates;
  for (int a = 1; a < static_cast<int>(node_count); ++a) {
    for (int b = a + 1; b < static_cast<int>(node_count); ++b) {
      if (!inst.adjacent(a, b)) candidates.emplace_back(a, b);
    }
  }
  inst.extra_edges = rng.sample(candidates, kExtraEdges);
  for (const auto& [a, b] : inst.extra_edges) connect(inst, a, b);

  const int empty_section = static_cast<int>(rng.index(kSections));
  auto groups = rng.sample(group_pool(), kSections - 1);
  std::sort(groups.begin(), groups.end());
  inst.groups = groups;
  std::size_t g = 0;
  for (int s = 0; s < kSections; ++s) {
    if (s == empty_section) continue;
    const std::string& group = groups[g++];
    for (int i = 0; i < n; ++i) {
      const int node = Instance::outer(s, static_cast<int>(rng.index(kOutersPerSection)));
      inst.units.push_back({group + "_" + std::to_string(i), s, node});
    }
  }
  return inst;
}

std::string render_request(const Instance& inst) {
  std::string out = "Goal:\n    Surround the target location {" + inst.nodes[0] +
                    "} from at least three neighboring locations with your units. A neighboring "
                    "location is considered covered if there are at least " +
                    std::to_string(inst.k) + " units at that location.\nUnits:\n";
  for (const auto& u : inst.units) {
    out += "Infantry (" + u.id + ") at (" + inst.nodes[static_cast<std::size_t>(u.start)] + ")\n";
  }
  out += "\nLocation Network (location - neighbors):\n";
  for (std::size_t i = 0; i < inst.nodes.size(); ++i) {
    std::vector<std::string> names;
    for (int j : inst.adj[i]) names.push_back("'" + inst.nodes[static_cast<std::size_t>(j)] + "'");
    out += inst.nodes[i] + " - [" + text::join(names, ", ") + "]\n";
  }
  return out;
}

std::string moves_json(const std::vector<Move>& moves) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < moves.size(); ++i) {
    nlohmann::ordered_json j{{"unit_id", moves[i].unit_id},
                             {"action_type", "move"},
                             {"location", moves[i].location}};
    out += "  " + j.dump() + (i + 1 < moves.size() ? ",\n" : "\n");
  }
  return out + "]";
}

std::array<int, kSections> neighbor_counts(const Instance& inst, const std::vector<Move>& moves) {
  std::map<std::string, int> where;
  for (const auto& u : inst.units) where[u.id] = u.start;
  for (const auto& m : moves) where[m.unit_id] = *inst.node_index(m.location);
  std::array<int, kSections> counts{};
  for (const auto& [id, node] : where) {
    if (node >= 1 && node <= kSections) ++counts[static_cast<std::size_t>(node - 1)];
  }
  return counts;
}

CheckResult check(const Instance& inst, std::string_view answer, const CheckOptions& opts) {
  const auto doc = nlohmann::json::parse(text::trim(answer), nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    return CheckResult::reject("malformed answer: expected a JSON list of moves");
  }
  std::map<std::string, int> start;
  for (const auto& u : inst.units) start[u.id] = u.start;

  std::vector<Move> moves;
  std::set<std::string> seen;
  int idx = 0;
  for (const auto& item : doc) {
    ++idx;
    if (!item.is_object() || !item.contains("unit_id") || !item["unit_id"].is_string() ||
        !item.contains("location") || !item["location"].is_string()) {
      return CheckResult::reject("malformed move", idx);
    }
    const std::string action = item.value("action_type", std::string("move"));
    if (action != "move") return CheckResult::reject("unknown action type: " + action, idx);
    const std::string id = item["unit_id"].get<std::string>();
    const std::string loc = item["location"].get<std::string>();
    auto it = start.find(id);
    if (it == start.end()) return CheckResult::reject("unknown unit: " + id, idx);
    if (!seen.insert(id).second) return CheckResult::reject("duplicate unit: " + id, idx);
    auto dest = inst.node_index(loc);
    if (!dest) return CheckResult::reject("unknown location: " + loc, idx);
    if (!opts.teleport && *dest != it->second && !inst.adjacent(it->second, *dest)) {
      return CheckResult::reject("illegal move: " + id + " from " +
                                     inst.nodes[static_cast<std::size_t>(it->second)] + " to " + loc,
                                 idx);
    }
    moves.push_back({id, loc});
  }

  const auto counts = neighbor_counts(inst, moves);
  int covered = 0;
  std::vector<std::string> parts;
  for (int s = 0; s < kSections; ++s) {
    if (counts[static_cast<std::size_t>(s)] >= inst.k) ++covered;
    parts.push_back(inst.nodes[static_cast<std::size_t>(Instance::neighbor(s))] + "=" +
                    std::to_string(counts[static_cast<std::size_t>(s)]));
  }
  if (covered < kCoveredNeighborsRequired) {
    return CheckResult::reject("coverage insufficient: " + text::join(parts, ", "));
  }
  return CheckResult::accept();
}

namespace {

// Edmonds-Karp on a small dense graph.
struct FlowGraph {
  explicit FlowGraph(std::size_t n) : cap(n, std::vector<int>(n, 0)) {}
  std::vector<std::vector<int>> cap;

  int max_flow(std::size_t s, std::size_t t) {
    int total = 0;
    const std::size_t n = cap.size();
    for (;;) {
      std::vector<std::size_t> parent(n, n);
      parent[s] = s;
      std::deque<std::size_t> q{s};
      while (!q.empty() && parent[t] == n) {
        const std::size_t u = q.front();
        q.pop_front();
        for (std::size_t v = 0; v < n; ++v) {
          if (parent[v] == n && cap[u][v] > 0) {
            parent[v] = u;
            q.push_back(v);
          }
        }
      }
      if (parent[t] == n) return total;
      int push = std::numeric_limits<int>::max();
      for (std::size_t v = t; v != s; v = parent[v]) push = std::min(push, cap[parent[v]][v]);
      for (std::size_t v = t; v != s; v = parent[v]) {
        cap[parent[v]][v] -= push;
        cap[v][parent[v]] += push;
      }
      total += push;
    }
  }
};

}  // namespace

std::optional<std::vector<Move>> solve(const Instance& inst, const CheckOptions& opts) {
  const std::size_t units = inst.units.size();
  for (int skip = kSections - 1; skip >= 0; --skip) {
    std::vector<int> chosen;
    for (int s = 0; s < kSections; ++s) {
      if (s != skip) chosen.push_back(s);
    }
    // 0 = source, 1..units, then the chosen neighbors, then the sink.
    const std::size_t src = 0, first_nb = 1 + units, sink = first_nb + chosen.size();
    FlowGraph g(sink + 1);
    for (std::size_t u = 0; u < units; ++u) {
      g.cap[src][1 + u] = 1;
      for (std::size_t c = 0; c < chosen.size(); ++c) {
        const int nb = Instance::neighbor(chosen[c]);
        const int at = inst.units[u].start;
        if (opts.teleport || at == nb || inst.adjacent(at, nb)) g.cap[1 + u][first_nb + c] = 1;
      }
    }
    for (std::size_t c = 0; c < chosen.size(); ++c) g.cap[first_nb + c][sink] = inst.k;
    if (g.max_flow(src, sink) < static_cast<int>(chosen.size()) * inst.k) continue;

    std::vector<Move> moves;
    for (std::size_t u = 0; u < units; ++u) {
      for (std::size_t c = 0; c < chosen.size(); ++c) {
        // Saturated unit->neighbor edges carry the assignment.
        const int nb = Instance::neighbor(chosen[c]);
        const int at = inst.units[u].start;
        const bool edge = opts.teleport || at == nb || inst.adjacent(at, nb);
        if (edge && g.cap[1 + u][first_nb + c] == 0 && at != nb) {
          moves.push_back({inst.units[u].id, inst.nodes[static_cast<std::size_t>(nb)]});
        }
      }
    }
    return moves;
  }
  return std::nullopt;
}

}  // namespace htnagent::um
