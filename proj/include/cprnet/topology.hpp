#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cprnet {

// Undirected agent connectivity graph. Edges are stored normalized
// (lo < hi, unique); adjacency lists are kept sorted ascending so every
// neighbour-ordered layout in the system is deterministic.
class Topology {
 public:
  Topology() = default;
  Topology(int node_count, std::vector<std::pair<int, int>> edges);

  static Topology complete(int n);
  static Topology ring(int n);
  static Topology line(int n);
  static Topology disconnected(int n);
  // "complete" | "ring" | "line" | "disconnected"
  static Topology preset(std::string_view name, int n);

  int node_count() const { return node_count_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  // N_i: sorted ascending, never contains i. Throws on out-of-range id.
  const std::vector<int>& neighbourhood(int i) const;

  int degree(int i) const { return static_cast<int>(neighbourhood(i).size()); }
  bool is_regular() const;
  const std::string& preset_name() const { return preset_name_; }

 private:
  int node_count_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::string preset_name_ = "custom";
};

}  // namespace cprnet
