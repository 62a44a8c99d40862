#include "cprnet/topology.hpp"

#include <algorithm>
#include <stdexcept>

namespace cprnet {

Topology::Topology(int node_count, std::vector<std::pair<int, int>> edges)
    : node_count_(node_count) {
  if (node_count < 1) {
    throw std::invalid_argument("topology: node_count must be >= 1");
  }
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a == b) {
      throw std::invalid_argument("topology: self-loop on node " + std::to_string(a));
    }
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      throw std::invalid_argument("topology: edge endpoint out of range");
    }
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  const auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw std::invalid_argument("topology: duplicate edge");
  }
  adjacency_.assign(static_cast<size_t>(node_count), {});
  for (auto [a, b] : edges_) {
    adjacency_[static_cast<size_t>(a)].push_back(b);
    adjacency_[static_cast<size_t>(b)].push_back(a);
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
  }
}

Topology Topology::complete(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      edges.emplace_back(i, j);
    }
  }
  Topology t(n, std::move(edges));
  t.preset_name_ = "complete";
  return t;
}

Topology Topology::ring(int n) {
  std::vector<std::pair<int, int>> edges;
  if (n == 2) {
    edges.emplace_back(0, 1);
  } else if (n >= 3) {
    for (int i = 0; i < n; ++i) {
      edges.emplace_back(i, (i + 1) % n);
    }
  }
  Topology t(n, std::move(edges));
  t.preset_name_ = "ring";
  return t;
}

Topology Topology::line(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) {
    edges.emplace_back(i, i + 1);
  }
  Topology t(n, std::move(edges));
  t.preset_name_ = "line";
  return t;
}

Topology Topology::disconnected(int n) {
  Topology t(n, {});
  t.preset_name_ = "disconnected";
  return t;
}

Topology Topology::preset(std::string_view name, int n) {
  if (name == "complete") return complete(n);
  if (name == "ring") return ring(n);
  if (name == "line") return line(n);
  if (name == "disconnected") return disconnected(n);
  throw std::invalid_argument("unknown topology preset: " + std::string(name));
}

const std::vector<int>& Topology::neighbourhood(int i) const {
  if (i < 0 || i >= node_count_) {
    throw std::out_of_range("topology: node id " + std::to_string(i) + " out of range");
  }
  return adjacency_[static_cast<size_t>(i)];
}

bool Topology::is_regular() const {
  if (node_count_ == 0) return true;
  const int d = degree(0);
  for (int i = 1; i < node_count_; ++i) {
    if (degree(i) != d) return false;
  }
  return true;
}

}  // namespace cprnet
