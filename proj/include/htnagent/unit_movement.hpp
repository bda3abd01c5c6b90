#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "htnagent/agent_loop.hpp"

namespace htnagent::um {

inline constexpr int kSections = 4;
inline constexpr int kOutersPerSection = 3;
inline constexpr int kExtraEdges = 12;
inline constexpr int kCoveredNeighborsRequired = 3;

struct Unit {
  std::string id;  // "<Group>_<index>"
  int section = 0;
  int start = 0;  // node index
};

/// Node 0 is the target, nodes 1..4 its neighbors, then three outer nodes
/// per neighbor in section order.
struct Instance {
  std::vector<std::string> nodes;
  /// Adjacency in insertion order (construction edges, then extra edges).
  std::vector<std::vector<int>> adj;
  std::vector<std::pair<int, int>> extra_edges;
  std::vector<Unit> units;
  std::vector<std::string> groups;  // per populated section, in section order
  int n = 1;
  int k = 1;

  static constexpr int target() { return 0; }
  static constexpr int neighbor(int section) { return 1 + section; }
  static int outer(int section, int j) { return 1 + kSections + section * kOutersPerSection + j; }

  std::optional<int> node_index(std::string_view name) const;
  bool adjacent(int a, int b) const;
  /// Total undirected edge count.
  std::size_t edge_count() const;
};

struct Move {
  std::string unit_id;
  std::string location;
  friend bool operator==(const Move&, const Move&) = default;
};

const std::vector<std::string>& place_pool();
const std::vector<std::string>& group_pool();

/// Throws InvalidArgument for n < 1 or k < 1 and when the name pools are
/// too small.
Instance generate(int n, int k, std::uint64_t seed);

/// 3n < 3k cannot be covered from the starting sections.
bool likely_unsolvable(int n, int k);

std::string render_request(const Instance& inst);

std::string moves_json(const std::vector<Move>& moves);

struct CheckOptions {
  /// Allow moves to any node instead of only adjacent ones.
  bool teleport = false;
};

CheckResult check(const Instance& inst, std::string_view answer, const CheckOptions& opts = {});

/// Final unit count at each of the four target neighbors after applying
/// already-validated moves.
std::array<int, kSections> neighbor_counts(const Instance& inst, const std::vector<Move>& moves);

/// A covering assignment when one exists: for every choice of three
/// neighbors, a max-flow from units to reachable neighbors (capacity k each).
/// Units already in place are not listed.
std::optional<std::vector<Move>> solve(const Instance& inst, const CheckOptions& opts = {});

}  // namespace htnagent::um
