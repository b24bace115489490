#include "gatelab/answers.hpp"

#include <cctype>
#include <limits>

namespace gatelab {

namespace {

constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

Rational checked(const Rational& a, const Rational& b, char op) {
  // Rational arithmetic on int64 can overflow silently; bound the operands first.
  auto small = [](const Rational& r) {
    return std::abs(r.numerator()) < (std::int64_t{1} << 31) && r.denominator() < (std::int64_t{1} << 31);
  };
  if (!small(a) || !small(b)) throw std::invalid_argument("arithmetic value out of range");
  switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    default:
      if (b.numerator() == 0) throw std::invalid_argument("division by zero");
      return a / b;
  }
}

Rational decimal(std::string_view whole, std::string_view frac) {
  if (whole.size() + frac.size() > 18) throw std::invalid_argument("numeric literal too long");
  std::int64_t num = 0, den = 1;
  for (char c : whole) num = num * 10 + (c - '0');
  for (char c : frac) {
    num = num * 10 + (c - '0');
    den *= 10;
  }
  return Rational(num, den);
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Rational parse() {
    Rational v = sum();
    skip();
    if (i_ != s_.size()) throw std::invalid_argument("unexpected character in expression");
    return v;
  }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  Rational sum() {
    Rational v = product();
    for (;;) {
      if (eat('+')) v = checked(v, product(), '+');
      else if (eat('-')) v = checked(v, product(), '-');
      else return v;
    }
  }

  Rational product() {
    Rational v = unary();
    for (;;) {
      if (eat('*') || eat('x')) v = checked(v, unary(), '*');
      else if (eat('/')) v = checked(v, unary(), '/');
      else return v;
    }
  }

  Rational unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return atom();
  }

  Rational atom() {
    if (eat('(')) {
      Rational v = sum();
      if (!eat(')')) throw std::invalid_argument("unbalanced parenthesis");
      return v;
    }
    skip();
    const std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    std::string_view whole = s_.substr(start, i_ - start);
    std::string_view frac;
    if (i_ < s_.size() && s_[i_] == '.') {
      const std::size_t f = ++i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      frac = s_.substr(f, i_ - f);
    }
    if (whole.empty() && frac.empty()) throw std::invalid_argument("expected a number");
    return decimal(whole, frac);
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

// Keeps only characters that can appear in an arithmetic expression.
std::string expression_part(std::string_view text) {
  std::string out;
  for (char c : text)
    if (std::isdigit(static_cast<unsigned char>(c)) || std::string_view("+-*/(). ").find(c) != std::string_view::npos)
      out += c;
  while (!out.empty() && (out.back() == '.' || out.back() == ' ')) out.pop_back();
  return out;
}

}  // namespace

Rational evaluate_expression(std::string_view expr) { return Parser(expr).parse(); }

std::optional<Rational> last_number(std::string_view text) {
  std::string s;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool sep = text[i] == ',' && i > 0 && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                     std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (!sep) s += text[i];
  }
  std::optional<Rational> last;
  std::size_t i = 0;
  auto digits = [&](std::size_t from) {
    std::size_t j = from;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    return j;
  };
  while (i < s.size()) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    const bool negative = i > 0 && s[i - 1] == '-';
    std::size_t j = digits(i);
    std::string_view whole(s.data() + i, j - i), frac;
    if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
      const std::size_t k = digits(j + 1);
      frac = std::string_view(s.data() + j + 1, k - j - 1);
      j = k;
    }
    Rational v = decimal(whole, frac);
    if (frac.empty() && j + 1 < s.size() && s[j] == '/' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
      const std::size_t k = digits(j + 1);
      const Rational den = decimal(std::string_view(s.data() + j + 1, k - j - 1), {});
      if (den.numerator() != 0) v /= den;
      j = k;
    }
    last = negative ? -v : v;
    i = j;
  }
  return last;
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u) || std::ispunct(u)) continue;
    out += static_cast<char>(std::tolower(u));
  }
  return out;
}

int verify_answer(const Task& task, std::string_view answer) {
  switch (task.category) {
    case TaskCategory::arithmetic: {
      const Rational expected =
          evaluate_expression(task.reference.empty() ? expression_part(task.question) : task.reference);
      const auto got = last_number(answer);
      return got && *got == expected ? 1 : 0;
    }
    case TaskCategory::factual: {
      const std::string got = normalize_answer(answer);
      std::string_view ref = task.reference;
      for (;;) {
        const auto bar = ref.find('|');
        const auto alt = normalize_answer(ref.substr(0, bar));
        if (!alt.empty() && alt == got) return 1;
        if (bar == std::string_view::npos) return 0;
        ref.remove_prefix(bar + 1);
      }
    }
    case TaskCategory::code:
      throw UnsupportedCategory("code tasks cannot be verified without an execution sandbox");
  }
  throw UnsupportedCategory("unknown task category");
}

}  // namespace gatelab
