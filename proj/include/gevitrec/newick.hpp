#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gevitrec/error.hpp"
#include "gevitrec/text.hpp"

namespace gevitrec {

struct TreeNode {
  std::string name;
  std::optional<double> branch_length;
  std::vector<std::size_t> children;
  std::optional<std::size_t> parent;

  bool is_leaf() const { return children.empty(); }
};

/// Rooted tree with nodes stored in pre-order; node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  std::size_t root() const { return 0; }

  /// Leaf indices in left-to-right (drawing) order.
  std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    if (nodes.empty()) return out;
    std::vector<std::size_t> stack{root()};
    while (!stack.empty()) {
      auto n = stack.back();
      stack.pop_back();
      if (nodes[n].is_leaf()) {
        out.push_back(n);
        continue;
      }
      for (auto it = nodes[n].children.rbegin(); it != nodes[n].children.rend(); ++it) {
        stack.push_back(*it);
      }
    }
    return out;
  }

  std::vector<std::string> leaf_labels() const {
    std::vector<std::string> out;
    for (auto i : leaves()) out.push_back(nodes[i].name);
    return out;
  }

  /// True when every non-root node carries a branch length.
  bool has_branch_lengths() const {
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (!nodes[i].branch_length) return false;
    }
    return nodes.size() > 1;
  }
};

namespace detail {

class NewickParser {
 public:
  explicit NewickParser(std::string_view src) : src_(src) {}

  Tree parse() {
    Tree tree;
    skip_ws();
    if (at_end()) fail("empty input");
    tree.nodes.push_back({});
    // Each frame is the node currently collecting children.
    std::vector<std::size_t> open;
    std::size_t current = 0;
    if (peek() == '(') {
      ++pos_;
      open.push_back(current);
      current = add_child(tree, current);
    }
    bool just_closed = false;
    for (;;) {
      skip_ws();
      if (at_end()) fail("unexpected end of input");
      char c = peek();
      if (c == '(') {
        if (just_closed) fail("'(' after ')'");
        ++pos_;
        open.push_back(current);
        current = add_child(tree, current);
        continue;
      }
      read_label(tree.nodes[current]);
      just_closed = false;
      skip_ws();
      if (at_end()) fail("missing ';'");
      c = peek();
      if (c == ',') {
        ++pos_;
        if (open.empty()) fail("',' outside parentheses");
        current = add_child(tree, open.back());
      } else if (c == ')') {
        ++pos_;
        if (open.empty()) fail("unbalanced ')'");
        current = open.back();
        open.pop_back();
        just_closed = true;
      } else if (c == ';') {
        if (!open.empty()) fail("unbalanced '('");
        ++pos_;
        skip_ws();
        if (!at_end()) fail("content after ';' (only single trees are supported)");
        break;
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
    }
    return tree;
  }

 private:
  static std::size_t add_child(Tree& tree, std::size_t parent) {
    tree.nodes.push_back({});
    auto idx = tree.nodes.size() - 1;
    tree.nodes[idx].parent = parent;
    tree.nodes[parent].children.push_back(idx);
    return idx;
  }

  void read_label(TreeNode& node) {
    skip_ws();
    if (!at_end() && peek() == '\'') {
      ++pos_;
      std::string name;
      for (;;) {
        if (at_end()) fail("unterminated quoted label");
        char c = src_[pos_++];
        if (c == '\'') {
          if (!at_end() && peek() == '\'') {
            name += '\'';
            ++pos_;
          } else {
            break;
          }
        } else {
          name += c;
        }
      }
      node.name = std::move(name);
    } else {
      std::size_t start = pos_;
      while (!at_end() && !is_delimiter(peek())) ++pos_;
      node.name = std::string(src_.substr(start, pos_ - start));
    }
    skip_ws();
    if (!at_end() && peek() == ':') {
      ++pos_;
      skip_ws();
      std::size_t start = pos_;
      while (!at_end() && !is_delimiter(peek())) ++pos_;
      auto value = text::parse_number(src_.substr(start, pos_ - start));
      if (!value) fail("bad branch length");
      node.branch_length = *value;
    }
  }

  static bool is_delimiter(char c) {
    return c == '(' || c == ')' || c == ',' || c == ':' || c == ';' || c == '[' || c == ' ' ||
           c == '\t' || c == '\n' || c == '\r';
  }

  void skip_ws() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else if (c == '[') {
        // Comment blocks are skipped, not interpreted.
        auto close = src_.find(']', pos_);
        if (close == std::string_view::npos) fail("unterminated comment");
        pos_ = close + 1;
      } else {
        break;
      }
    }
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError, "tree: " + what + " at offset " + std::to_string(pos_));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Tree parse_newick(std::string_view src) { return detail::NewickParser(src).parse(); }

}  // namespace gevitrec
