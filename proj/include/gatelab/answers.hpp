#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gatelab/bon.hpp"

namespace gatelab {

class UnsupportedCategory : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Rational = boost::rational<std::int64_t>;

// Exact value of an expression over + - * / and parentheses with integer or
// decimal literals. Throws invalid_argument on syntax errors, division by
// zero or overflow.
Rational evaluate_expression(std::string_view expr);

// Last number in free text (integer, decimal or a/b fraction; thousands
// separators allowed). Empty when the text has no number.
std::optional<Rational> last_number(std::string_view text);

// Lowercase with punctuation and whitespace removed.
std::string normalize_answer(std::string_view text);

// Arithmetic: the reference (or, if empty, the question) is evaluated exactly
// and compared with the last number of the answer. Factual: normalized match
// against any '|'-separated reference alternative. Code tasks are rejected.
int verify_answer(const Task& task, std::string_view answer);

}  // namespace gatelab
