#pragma once

// Line-delimited JSON persistence for every stage artifact. Each file starts
// with a schema header line {"schema": "<name>"}; appends skip the header.
// Decimal values are serialized as exact strings.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mwp/gateway.hpp"
#include "mwp/generate.hpp"
#include "mwp/grounding.hpp"
#include "mwp/tree.hpp"

namespace mwp {

using json = nlohmann::json;

inline Decimal decimal_from_json(const json& j) {
  if (j.is_string()) return Decimal::parse(j.get<std::string>());
  if (j.is_number_integer()) return Decimal::from_int(j.get<long long>());
  if (j.is_number_float()) return Decimal::parse(j.dump());
  throw std::invalid_argument("expected a number or numeric string");
}

// --- problems ---------------------------------------------------------------

inline Problem problem_from_json(const json& j) {
  Problem p;
  p.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                 : j["id"].dump();
  p.text = j.at("question").get<std::string>();
  p.answer = decimal_from_json(j.at("answer"));
  std::string src = j.value("source", "other");
  if (src == "gsm8k" || src == "GSM8K") p.source = ProblemSource::GSM8K;
  else if (src == "multiarith" || src == "MultiArith") p.source = ProblemSource::MultiArith;
  else p.source = ProblemSource::Other;
  return p;
}

// --- trees -------------------------------------------------------------------

inline json tree_to_json(const ProblemTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    json jn;
    jn["id"] = n.id;
    switch (n.kind) {
      case NodeKind::Binary: {
        const char* ops[] = {"add", "sub", "mul", "div", "pow"};
        jn["kind"] = "binary";
        jn["op"] = ops[int(n.bin_op)];
        jn["left"] = n.left;
        jn["right"] = n.right;
        break;
      }
      case NodeKind::Unary: {
        const char* ops[] = {"negate", "trunc", "round"};
        jn["kind"] = "unary";
        jn["op"] = ops[int(n.un_op)];
        jn["operand"] = n.left;
        break;
      }
      case NodeKind::Leaf:
        jn["kind"] = tree.is_variable_leaf(n.id) ? "variable" : "constant";
        jn["literal"] = n.literal.to_string();
        jn["ordinal"] = n.literal_ordinal;
        break;
    }
    jn["value"] = n.value.to_string();
    if (n.is_divisor) jn["divisor"] = true;
    if (n.is_final_answer) jn["final_answer"] = true;
    nodes.push_back(std::move(jn));
  }
  return json{{"root", tree.root},
              {"nodes", std::move(nodes)},
              {"variables", tree.variables},
              {"constants", tree.constants}};
}

inline ProblemTree tree_from_json(const json& j) {
  ProblemTree tree;
  tree.root = j.at("root").get<int>();
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    n.id = jn.at("id").get<int>();
    std::string kind = jn.at("kind").get<std::string>();
    if (kind == "binary") {
      n.kind = NodeKind::Binary;
      std::string op = jn.at("op").get<std::string>();
      n.bin_op = op == "add"   ? BinOp::Add
                 : op == "sub" ? BinOp::Sub
                 : op == "mul" ? BinOp::Mul
                 : op == "div" ? BinOp::Div
                               : BinOp::Pow;
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
    } else if (kind == "unary") {
      n.kind = NodeKind::Unary;
      std::string op = jn.at("op").get<std::string>();
      n.un_op = op == "negate" ? UnOp::Negate : op == "trunc" ? UnOp::Trunc : UnOp::Round;
      n.left = jn.at("operand").get<int>();
    } else {
      n.kind = NodeKind::Leaf;
      n.literal = Decimal::parse(jn.at("literal").get<std::string>());
      n.literal_ordinal = jn.at("ordinal").get<int>();
    }
    n.value = Decimal::parse(jn.at("value").get<std::string>());
    n.is_divisor = jn.value("divisor", false);
    n.is_final_answer = jn.value("final_answer", false);
    tree.nodes.push_back(std::move(n));
  }
  tree.variables = j.at("variables").get<std::vector<int>>();
  tree.constants = j.at("constants").get<std::vector<int>>();
  for (const auto& n : tree.nodes)
    if (n.kind == NodeKind::Leaf) tree.leaves.push_back(n.id);
  std::sort(tree.leaves.begin(), tree.leaves.end(), [&](int a, int b) {
    return tree.node(a).literal_ordinal < tree.node(b).literal_ordinal;
  });
  return tree;
}

// --- grounding ---------------------------------------------------------------

inline json grounding_to_json(const Grounding& g) {
  json numbers = json::array();
  for (const auto& tn : g.text_numbers)
    numbers.push_back({{"surface", tn.surface},
                       {"value", tn.value.to_string()},
                       {"span", {tn.begin, tn.end}},
                       {"occurrence", tn.occurrence_index}});
  json pairs = json::array();
  for (const auto& p : g.pairs) {
    const char* forms[] = {"as_is", "percent_over_100", "one_plus_percent_over_100"};
    const auto& tn = g.text_numbers[size_t(p.text_index)];
    pairs.push_back({{"text_index", p.text_index},
                     {"span", {tn.begin, tn.end}},
                     {"leaf_id", p.leaf_id},
                     {"form", forms[int(p.form)]}});
  }
  return json{{"text_numbers", std::move(numbers)},
              {"pairs", std::move(pairs)},
              {"constants", g.constant_leaves},
              {"verdict", g.status == GroundingStatus::Grounded ? "grounded" : "discarded"},
              {"detail", g.detail}};
}

inline Grounding grounding_from_json(const json& j) {
  Grounding g;
  for (const auto& jn : j.at("text_numbers")) {
    TextNumber tn;
    tn.surface = jn.at("surface").get<std::string>();
    tn.value = Decimal::parse(jn.at("value").get<std::string>());
    tn.begin = jn.at("span")[0].get<size_t>();
    tn.end = jn.at("span")[1].get<size_t>();
    tn.occurrence_index = jn.at("occurrence").get<int>();
    g.text_numbers.push_back(std::move(tn));
  }
  for (const auto& jp : j.at("pairs")) {
    GroundingPair p;
    p.text_index = jp.at("text_index").get<int>();
    p.leaf_id = jp.at("leaf_id").get<int>();
    std::string form = jp.at("form").get<std::string>();
    p.form = form == "as_is" ? MatchForm::AsIs
             : form == "percent_over_100" ? MatchForm::PercentOver100
                                          : MatchForm::OnePlusPercentOver100;
    g.pairs.push_back(p);
  }
  g.constant_leaves = j.at("constants").get<std::vector<int>>();
  g.status = j.at("verdict").get<std::string>() == "grounded" ? GroundingStatus::Grounded
                                                              : GroundingStatus::Discarded;
  g.detail = j.value("detail", "");
  return g;
}

// --- variants ----------------------------------------------------------------

inline json variant_to_json(const VariantRecord& v, int variant_index) {
  json assignment = json::array();
  for (const auto& a : v.assignment) assignment.push_back(a.to_string());
  return json{{"problem_id", v.problem_id},
              {"method", method_name(v.method)},
              {"variant_index", variant_index},
              {"assignment", std::move(assignment)},
              {"question", v.rendered_text},
              {"answer", v.answer.to_string()}};
}

inline VariantRecord variant_from_json(const json& j) {
  VariantRecord v;
  v.problem_id = j.at("problem_id").get<std::string>();
  v.method = *method_from_name(j.at("method").get<std::string>());
  for (const auto& a : j.at("assignment")) v.assignment.push_back(Decimal::parse(a.get<std::string>()));
  v.rendered_text = j.at("question").get<std::string>();
  v.answer = Decimal::parse(j.at("answer").get<std::string>());
  return v;
}

// --- query log ---------------------------------------------------------------

inline json query_to_json(const QueryRecord& q) {
  json j{{"problem_id", q.problem_id},
         {"variant_index", q.variant_index},
         {"model", q.model},
         {"prompt", q.prompt},
         {"raw_response", q.raw_response},
         {"latency_ms", q.latency_ms}};
  if (q.extracted_answer) j["extracted_answer"] = q.extracted_answer->to_string();
  if (q.prompt_tokens >= 0) j["prompt_tokens"] = q.prompt_tokens;
  if (q.completion_tokens >= 0) j["completion_tokens"] = q.completion_tokens;
  if (q.truncated) j["truncated"] = true;
  return j;
}

inline QueryRecord query_from_json(const json& j) {
  QueryRecord q;
  q.problem_id = j.at("problem_id").get<std::string>();
  q.variant_index = j.at("variant_index").get<int>();
  q.model = j.at("model").get<std::string>();
  q.prompt = j.value("prompt", "");
  q.raw_response = j.value("raw_response", "");
  if (j.contains("extracted_answer"))
    q.extracted_answer = Decimal::parse(j["extracted_answer"].get<std::string>());
  q.latency_ms = j.value("latency_ms", 0LL);
  q.prompt_tokens = j.value("prompt_tokens", -1LL);
  q.completion_tokens = j.value("completion_tokens", -1LL);
  q.truncated = j.value("truncated", false);
  return q;
}

// --- jsonl io ----------------------------------------------------------------

class JsonlWriter {
 public:
  JsonlWriter(const std::filesystem::path& path, const std::string& schema, bool append = false)
      : out_(path, append && std::filesystem::exists(path) ? std::ios::app : std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    if (out_.tellp() == 0) {
      out_ << json{{"schema", schema}}.dump() << "\n";
      out_.flush();
    }
  }

  void write(const json& j) {
    out_ << j.dump() << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

inline std::vector<json> read_jsonl(const std::filesystem::path& path,
                                    const std::string& expected_schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<json> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (first) {
      first = false;
      if (!j.contains("schema") || j["schema"] != expected_schema)
        throw std::runtime_error(path.string() + ": expected schema " + expected_schema);
      continue;
    }
    out.push_back(std::move(j));
  }
  if (first) throw std::runtime_error(path.string() + ": missing schema header");
  return out;
}

}  // namespace mwp
