#pragma once

// Arithmetic expressions in one variable x: + - * / ^, unary minus,
// parentheses, constants pi and e, and sin cos tan exp log sqrt abs tanh.

#include "akscal/error.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>

namespace akscal::expr {

using Function = std::function<double(double)>;

namespace detail {

class Parser {
 public:
  explicit Parser(std::string text) : s_(std::move(text)) {}

  Function parse() {
    Function f = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error("cli", "expression", what + " at position " + std::to_string(pos_) + " in '" + s_ + "'");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Function sum() {
    Function f = product();
    for (;;) {
      if (eat('+')) {
        f = [a = f, b = product()](double x) { return a(x) + b(x); };
      } else if (eat('-')) {
        f = [a = f, b = product()](double x) { return a(x) - b(x); };
      } else {
        return f;
      }
    }
  }

  Function product() {
    Function f = unary();
    for (;;) {
      if (eat('*')) {
        f = [a = f, b = unary()](double x) { return a(x) * b(x); };
      } else if (eat('/')) {
        f = [a = f, b = unary()](double x) { return a(x) / b(x); };
      } else {
        return f;
      }
    }
  }

  Function unary() {
    if (eat('-')) return [a = unary()](double x) { return -a(x); };
    if (eat('+')) return unary();
    return power();
  }

  Function power() {
    Function base = primary();
    if (eat('^')) return [a = base, b = unary()](double x) { return std::pow(a(x), b(x)); };
    return base;
  }

  Function primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      Function f = sum();
      if (!eat(')')) fail("expected ')'");
      return f;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return [v](double) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") return [](double x) { return x; };
      if (name == "pi") return [](double) { return std::numbers::pi; };
      if (name == "e") return [](double) { return std::numbers::e; };
      static const std::map<std::string, double (*)(double)> fns = {
          {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
          {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
          {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
          {"abs", [](double v) { return std::abs(v); }},   {"tanh", [](double v) { return std::tanh(v); }}};
      const auto it = fns.find(name);
      if (it == fns.end()) fail("unknown name '" + name + "'");
      if (!eat('(')) fail("expected '(' after " + name);
      Function arg = sum();
      if (!eat(')')) fail("expected ')'");
      return [fn = it->second, arg](double x) { return fn(arg(x)); };
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Function parse(const std::string& text) { return detail::Parser(text).parse(); }

}  // namespace akscal::expr
