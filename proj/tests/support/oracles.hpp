#pragma once

// Independent reference implementations. None of these call into the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Column count of a simple (quote-free) CSV header line.
inline std::size_t csv_column_count(const std::string& text) {
  auto line = text.substr(0, text.find('\n'));
  return std::size_t(std::count(line.begin(), line.end(), ',')) + 1;
}

// Data lines after the header, ignoring blank lines.
inline std::size_t csv_row_count(const std::string& text) {
  std::size_t rows = 0, start = text.find('\n');
  while (start != std::string::npos && start + 1 < text.size()) {
    auto end = text.find('\n', start + 1);
    auto line = text.substr(start + 1, end == std::string::npos ? std::string::npos : end - start - 1);
    if (!line.empty() && line != "\r") ++rows;
    start = end;
  }
  return rows;
}

// Leaf names of a Newick string: a name token directly after '(' or ','.
inline std::vector<std::string> newick_leaves(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '(' && s[i] != ',') continue;
    std::size_t j = i + 1;
    while (j < s.size() && s[j] == ' ') ++j;
    if (j >= s.size() || s[j] == '(') continue;
    std::size_t k = j;
    while (k < s.size() && s[k] != ':' && s[k] != ',' && s[k] != ')' && s[k] != ';') ++k;
    if (k > j) out.push_back(s.substr(j, k - j));
  }
  return out;
}

inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  std::set<std::string> uni = sa;
  uni.insert(sb.begin(), sb.end());
  return double(inter) / double(uni.size());
}

inline std::size_t distinct(const std::vector<std::string>& v) {
  return std::set<std::string>(v.begin(), v.end()).size();
}

// Union-find over n items; returns the component label of each item.
struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::size_t count() {
    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < parent.size(); ++i) roots.insert(find(i));
    return roots.size();
  }
};

struct WeightedEdge {
  std::size_t a, b;
  double cost;
};

// All-pairs minimum path cost by Floyd-Warshall. Costs are non-negative, so
// the cheapest walk is also the cheapest simple path.
inline std::vector<std::vector<double>> all_pairs_min_cost(std::size_t n, const std::vector<WeightedEdge>& edges) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : edges) {
    d[e.a][e.b] = std::min(d[e.a][e.b], e.cost);
    d[e.b][e.a] = std::min(d[e.b][e.a], e.cost);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  return d;
}

inline double min_path_cost(std::size_t n, const std::vector<WeightedEdge>& edges, std::size_t from, std::size_t to) {
  return all_pairs_min_cost(n, edges)[from][to];
}

// Competition rank: 1 + number of strictly larger values.
inline std::vector<int> ranks(const std::vector<double>& v) {
  std::vector<int> out;
  for (double x : v) {
    int r = 1;
    for (double y : v) r += y > x + 1e-9 ? 1 : 0;
    out.push_back(r);
  }
  return out;
}

inline std::map<std::string, int> count_by(const std::vector<std::string>& v) {
  std::map<std::string, int> out;
  for (const auto& x : v) ++out[x];
  return out;
}

inline double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

}  // namespace oracle
