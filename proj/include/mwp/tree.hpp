#pragma once

// Computation tree built from a solution script. The final print expression is
// the root; identifier references are inlined by cloning operation nodes while
// literal leaves keep a single shared identity, so one text number maps to one
// logical variable no matter how often its defining expression is reused.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwp/decimal.hpp"
#include "mwp/script.hpp"

namespace mwp {

enum class ProblemSource { GSM8K, MultiArith, Other };

struct Problem {
  std::string id;
  std::string text;
  Decimal answer;
  ProblemSource source = ProblemSource::Other;
};

enum class NodeKind { Binary, Unary, Leaf };

struct TreeNode {
  int id = -1;
  NodeKind kind = NodeKind::Leaf;
  BinOp bin_op = BinOp::Add;
  UnOp un_op = UnOp::Negate;
  int left = -1;   // Binary/Unary operand
  int right = -1;  // Binary only
  Decimal value;   // cached evaluation under the original leaf values
  Decimal literal;          // Leaf only
  int literal_ordinal = -1; // Leaf only: occurrence order in the source
  bool is_divisor = false;
  bool is_final_answer = false;
};

struct ProblemTree {
  std::vector<TreeNode> nodes;  // arena, node id == index
  int root = -1;
  std::vector<int> leaves;     // leaf ids ordered by source occurrence
  std::vector<int> variables;  // perturbable leaves (all leaves until grounded)
  std::vector<int> constants;  // leaves with no text counterpart

  const TreeNode& node(int id) const { return nodes[size_t(id)]; }
  bool is_variable_leaf(int id) const {
    for (int v : variables)
      if (v == id) return true;
    return false;
  }
};

enum class VerdictStatus {
  Valid,
  AnswerMismatch,
  UnsupportedConstruct,
  ComplexExpression,
  NumberMisalignment,
};

struct ValidationVerdict {
  VerdictStatus status = VerdictStatus::Valid;
  std::string detail;
};

inline const char* verdict_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Valid: return "valid";
    case VerdictStatus::AnswerMismatch: return "answer_mismatch";
    case VerdictStatus::UnsupportedConstruct: return "unsupported_construct";
    case VerdictStatus::ComplexExpression: return "complex_expression";
    case VerdictStatus::NumberMisalignment: return "number_misalignment";
  }
  return "unknown";
}

namespace tree_detail {

struct Builder {
  ProblemTree tree;
  std::map<std::string, int> ident_roots;
  std::map<int, int> leaf_by_ordinal;

  int build_expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Literal: {
        auto it = leaf_by_ordinal.find(e.literal_ordinal);
        if (it != leaf_by_ordinal.end()) return it->second;
        TreeNode n;
        n.id = int(tree.nodes.size());
        n.kind = NodeKind::Leaf;
        n.literal = e.literal;
        n.literal_ordinal = e.literal_ordinal;
        tree.nodes.push_back(n);
        leaf_by_ordinal[e.literal_ordinal] = n.id;
        return n.id;
      }
      case Expr::Kind::Ident: {
        auto it = ident_roots.find(e.ident);
        if (it == ident_roots.end())
          throw ScriptError(ScriptErrorKind::Structural,
                            "dangling identifier '" + e.ident + "'");
        int id = it->second;
        if (used_roots.count(id)) return clone(id);  // reuse duplicates ops, not leaves
        used_roots.insert(id);
        return id;
      }
      case Expr::Kind::Unary: {
        int operand = build_expr(*e.lhs);
        TreeNode n;
        n.id = int(tree.nodes.size());
        n.kind = NodeKind::Unary;
        n.un_op = e.un_op;
        n.left = operand;
        tree.nodes.push_back(n);
        return n.id;
      }
      case Expr::Kind::Binary: {
        int l = build_expr(*e.lhs);
        int r = build_expr(*e.rhs);
        TreeNode n;
        n.id = int(tree.nodes.size());
        n.kind = NodeKind::Binary;
        n.bin_op = e.bin_op;
        n.left = l;
        n.right = r;
        tree.nodes.push_back(n);
        return n.id;
      }
    }
    return -1;
  }

  int clone(int id) {
    const TreeNode src = tree.nodes[size_t(id)];
    if (src.kind == NodeKind::Leaf) return id;  // shared leaf identity
    TreeNode n = src;
    n.left = src.left >= 0 ? clone(src.left) : -1;
    n.right = src.right >= 0 ? clone(src.right) : -1;
    n.id = int(tree.nodes.size());
    tree.nodes.push_back(n);
    return n.id;
  }

  std::set<int> used_roots;
};

inline Decimal apply_bin(BinOp op, const Decimal& a, const Decimal& b) {
  switch (op) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Mul: return a * b;
    case BinOp::Div: return a / b;
    case BinOp::Pow: {
      if (!b.is_integer_1e9())
        throw EvalError(EvalErrorKind::UnsupportedPower, "non-integer exponent");
      return a.pow_int(b.rounded_half_up().to_int64());
    }
  }
  throw EvalError(EvalErrorKind::Overflow, "unreachable");
}

inline Decimal apply_un(UnOp op, const Decimal& a) {
  switch (op) {
    case UnOp::Negate: return a.negated();
    case UnOp::Trunc: return a.truncated();
    case UnOp::Round: return a.rounded_half_up();
  }
  throw EvalError(EvalErrorKind::Overflow, "unreachable");
}

}  // namespace tree_detail

inline ProblemTree build_tree(const SolutionScript& script);
inline std::vector<Decimal> evaluate_all(const ProblemTree& tree,
                                         std::span<const Decimal> assignment = {});

inline ProblemTree build_tree(const SolutionScript& script) {
  tree_detail::Builder b;
  for (const auto& st : script.statements) {
    if (st.kind == Statement::Kind::Assign) {
      b.ident_roots[st.target] = b.build_expr(st.expr);
    } else {
      b.tree.root = b.build_expr(st.expr);
    }
  }
  ProblemTree tree = std::move(b.tree);
  // drop nodes not reachable from the print expression (unused assignments)
  {
    std::vector<char> keep(tree.nodes.size(), 0);
    std::vector<int> stack{tree.root};
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      if (keep[size_t(id)]) continue;
      keep[size_t(id)] = 1;
      const TreeNode& n = tree.nodes[size_t(id)];
      if (n.left >= 0) stack.push_back(n.left);
      if (n.right >= 0) stack.push_back(n.right);
    }
    std::vector<int> remap(tree.nodes.size(), -1);
    std::vector<TreeNode> kept;
    for (size_t i = 0; i < tree.nodes.size(); ++i) {
      if (!keep[i]) continue;
      remap[i] = int(kept.size());
      kept.push_back(tree.nodes[i]);
    }
    for (auto& n : kept) {
      n.id = remap[size_t(n.id)];
      if (n.left >= 0) n.left = remap[size_t(n.left)];
      if (n.right >= 0) n.right = remap[size_t(n.right)];
    }
    tree.nodes = std::move(kept);
    tree.root = remap[size_t(tree.root)];
  }
  tree.nodes[size_t(tree.root)].is_final_answer = true;
  // leaves ordered by source occurrence; all start as perturbation candidates
  std::map<int, int> by_ordinal;
  for (const auto& n : tree.nodes)
    if (n.kind == NodeKind::Leaf) by_ordinal[n.literal_ordinal] = n.id;
  for (auto& [ord, id] : by_ordinal) tree.leaves.push_back(id);
  tree.variables = tree.leaves;
  // divisor role: leaf sitting directly under a division's right side
  for (auto& n : tree.nodes)
    if (n.kind == NodeKind::Binary && n.bin_op == BinOp::Div &&
        tree.nodes[size_t(n.right)].kind == NodeKind::Leaf)
      tree.nodes[size_t(n.right)].is_divisor = true;
  // cache values under the original literals
  std::vector<Decimal> values = evaluate_all(tree);
  for (auto& n : tree.nodes) n.value = values[size_t(n.id)];
  return tree;
}

// Evaluates every node; assignment (one value per variables[] entry) overrides
// variable-leaf literals. Pure: the tree is not modified.
inline std::vector<Decimal> evaluate_all(const ProblemTree& tree,
                                         std::span<const Decimal> assignment) {
  if (!assignment.empty() && assignment.size() != tree.variables.size())
    throw std::invalid_argument("assignment size does not match variable count");
  std::vector<Decimal> leaf_value(tree.nodes.size());
  std::vector<char> leaf_set(tree.nodes.size(), 0);
  if (!assignment.empty()) {
    for (size_t i = 0; i < assignment.size(); ++i) {
      leaf_value[size_t(tree.variables[i])] = assignment[i];
      leaf_set[size_t(tree.variables[i])] = 1;
    }
  }
  std::vector<Decimal> out(tree.nodes.size());
  std::vector<char> done(tree.nodes.size(), 0);
  std::function<const Decimal&(int)> eval = [&](int id) -> const Decimal& {
    if (done[size_t(id)]) return out[size_t(id)];
    const TreeNode& n = tree.nodes[size_t(id)];
    switch (n.kind) {
      case NodeKind::Leaf:
        out[size_t(id)] = leaf_set[size_t(id)] ? leaf_value[size_t(id)] : n.literal;
        break;
      case NodeKind::Unary:
        out[size_t(id)] = tree_detail::apply_un(n.un_op, eval(n.left));
        break;
      case NodeKind::Binary:
        out[size_t(id)] = tree_detail::apply_bin(n.bin_op, eval(n.left), eval(n.right));
        break;
    }
    done[size_t(id)] = 1;
    return out[size_t(id)];
  };
  for (const auto& n : tree.nodes) eval(n.id);
  return out;
}

inline Decimal evaluate(const ProblemTree& tree, std::span<const Decimal> assignment = {}) {
  return evaluate_all(tree, assignment)[size_t(tree.root)];
}

inline ValidationVerdict validate(const ProblemTree& tree, const Problem& problem) {
  const Decimal& computed = tree.nodes[size_t(tree.root)].value;
  if (answers_match(computed, problem.answer)) return {VerdictStatus::Valid, ""};
  return {VerdictStatus::AnswerMismatch,
          "computed " + computed.to_string() + " vs dataset " + problem.answer.to_string()};
}

struct OpCounts {
  int add = 0, sub = 0, mul = 0, div = 0, pow = 0;
  int unary = 0, trunc = 0, round = 0, negate = 0;
  int total() const { return add + sub + mul + div + pow + unary; }
};

inline OpCounts count_ops(const ProblemTree& tree) {
  OpCounts c;
  for (const auto& n : tree.nodes) {
    if (n.kind == NodeKind::Binary) {
      switch (n.bin_op) {
        case BinOp::Add: ++c.add; break;
        case BinOp::Sub: ++c.sub; break;
        case BinOp::Mul: ++c.mul; break;
        case BinOp::Div: ++c.div; break;
        case BinOp::Pow: ++c.pow; break;
      }
    } else if (n.kind == NodeKind::Unary) {
      ++c.unary;
      switch (n.un_op) {
        case UnOp::Trunc: ++c.trunc; break;
        case UnOp::Round: ++c.round; break;
        case UnOp::Negate: ++c.negate; break;
      }
    }
  }
  return c;
}

}  // namespace mwp
