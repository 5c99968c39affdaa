#pragma once

// Prompt templates and answer extraction for the querying side.

#include <optional>
#include <string>

#include "mwp/decimal.hpp"
#include "mwp/grounding.hpp"

namespace mwp {

enum class PromptTemplate { ZeroShotCoT, CodeGen };

inline std::string render_prompt(const std::string& question, PromptTemplate tmpl,
                                 const std::string& answer = "") {
  if (tmpl == PromptTemplate::ZeroShotCoT) {
    return "Solve a math problem. The solution ends with \"the answer is (a number)\" "
           "like \"the answer is 1\".\n\nQuestion: " +
           question + "\n\nAnswer: Let's think step by step.";
  }
  return "Write a Python script that contains a step-by-step solution for a given math "
         "problem and its answer. Start the script by defining variables corresponding "
         "to the quantities mentioned in the problem. Print the final answer at the end "
         "of the script. Do not use if-else statements, floor divisions, and loops to "
         "solve the problem.\n\nGiven problem: " +
         question + "\n\nAnswer: " + answer + "\n\nPython script:";
}

// Number following the last case-insensitive "the answer is"; currency,
// commas and a trailing period are stripped. Falls back to the last
// standalone number anywhere in the response.
inline std::optional<Decimal> extract_answer(const std::string& raw_response) {
  auto lower = raw_response;
  for (auto& c : lower) c = char(std::tolower((unsigned char)c));
  const std::string phrase = "the answer is";
  size_t pos = lower.rfind(phrase);
  auto first_number = [&](size_t from) -> std::optional<Decimal> {
    std::string tail = raw_response.substr(from);
    auto nums = extract_text_numbers(tail);
    if (nums.empty()) return std::nullopt;
    Decimal v = nums.front().value;
    size_t abs_begin = from + nums.front().begin;
    // sign directly in front of the number
    size_t p = abs_begin;
    while (p > from && raw_response[p - 1] == '$') --p;
    if (p > from && raw_response[p - 1] == '-') v = v.negated();
    return v;
  };
  if (pos != std::string::npos) {
    auto v = first_number(pos + phrase.size());
    if (v) return v;
  }
  auto nums = extract_text_numbers(raw_response);
  if (nums.empty()) return std::nullopt;
  Decimal v = nums.back().value;
  size_t b = nums.back().begin;
  while (b > 0 && raw_response[b - 1] == '$') --b;
  if (b > 0 && raw_response[b - 1] == '-') v = v.negated();
  return v;
}

}  // namespace mwp
