#include "ibia/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ibia/error.hpp"

namespace ibia {

namespace {

struct Token {
  std::string_view text;
  int line;
};

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  Token next() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    return {text_.substr(start, pos_ - start), line_};
  }

  long long next_int() {
    Token t = next();
    long long v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      throw ParseError("expected an integer, got '" + std::string(t.text) + "'", t.line);
    return v;
  }

  double next_double() {
    Token t = next();
    // from_chars for double is unavailable on older libstdc++; strtod is exact.
    std::string s(t.text);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
      throw ParseError("expected a number, got '" + s + "'", t.line);
    return v;
  }

  int line() const { return line_; }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shortest text for a double y such that log(y) reproduces `lv` exactly.
std::string format_entry(double lv) {
  if (lv == kLogZero) return "0";
  double y = std::exp(lv);
  if (std::log(y) != lv) {
    for (int k = 1; k <= 8; ++k) {
      double up = y, down = y;
      for (int s = 0; s < k; ++s) {
        up = std::nextafter(up, HUGE_VAL);
        down = std::nextafter(down, 0.0);
      }
      if (std::log(up) == lv) { y = up; break; }
      if (std::log(down) == lv) { y = down; break; }
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", y);
  return buf;
}

}  // namespace

VarSet Model::used_vars() const {
  std::vector<VarId> all;
  for (const Factor& f : factors) all.insert(all.end(), f.scope.begin(), f.scope.end());
  return make_varset(std::move(all));
}

void Model::validate() const {
  for (int c : cards) {
    if (c < 1) throw InvalidArgument("variable cardinality < 1");
  }
  for (const Factor& f : factors) {
    for (std::size_t i = 0; i < f.scope.size(); ++i) {
      const VarId v = f.scope[i];
      if (v < 0 || v >= num_vars())
        throw InvalidArgument("factor refers to undeclared variable " + std::to_string(v));
      if (cards[static_cast<std::size_t>(v)] != f.dims[i])
        throw InvalidArgument("factor dimension disagrees with cardinality of variable " +
                              std::to_string(v));
    }
  }
}

Model parse_uai(std::string_view text) {
  Tokenizer tok(text);
  Model m;
  Token pre = tok.next();
  if (pre.text == "MARKOV") {
    m.kind = ModelKind::Markov;
  } else if (pre.text == "BAYES") {
    m.kind = ModelKind::Bayes;
  } else {
    throw ParseError("expected MARKOV or BAYES preamble, got '" + std::string(pre.text) + "'",
                     pre.line);
  }
  const long long n = tok.next_int();
  if (n < 0) throw ParseError("negative variable count", tok.line());
  m.cards.resize(static_cast<std::size_t>(n));
  for (auto& c : m.cards) {
    const long long v = tok.next_int();
    if (v < 1) throw ParseError("variable cardinality must be >= 1", tok.line());
    c = static_cast<int>(v);
  }
  const long long nf = tok.next_int();
  if (nf < 0) throw ParseError("negative factor count", tok.line());
  std::vector<std::vector<VarId>> scopes(static_cast<std::size_t>(nf));
  for (auto& scope : scopes) {
    const long long k = tok.next_int();
    if (k < 0) throw ParseError("negative scope size", tok.line());
    for (long long i = 0; i < k; ++i) {
      const long long v = tok.next_int();
      if (v < 0 || v >= n)
        throw ParseError("scope refers to undeclared variable " + std::to_string(v), tok.line());
      scope.push_back(static_cast<VarId>(v));
    }
    if (make_varset(scope).size() != scope.size())
      throw ParseError("scope lists a variable twice", tok.line());
  }
  for (auto& scope : scopes) {
    std::vector<int> dims;
    std::size_t expected = 1;
    for (VarId v : scope) {
      dims.push_back(m.cards[static_cast<std::size_t>(v)]);
      expected *= static_cast<std::size_t>(dims.back());
    }
    const long long count = tok.next_int();
    const int count_line = tok.line();
    if (count < 0 || static_cast<std::size_t>(count) != expected)
      throw ParseError("table length " + std::to_string(count) + " does not match scope size " +
                           std::to_string(expected),
                       count_line);
    std::vector<double> values(expected);
    for (auto& x : values) {
      x = tok.next_double();
      if (!(x >= 0.0)) throw ParseError("negative or NaN table entry", tok.line());
    }
    m.factors.push_back(Factor::from_linear(scope, dims, values));
  }
  if (!tok.at_end()) throw ParseError("trailing tokens after last table", tok.line());
  return m;
}

Model read_uai_file(const std::string& path) { return parse_uai(slurp(path)); }

std::string write_uai(const Model& model) {
  std::ostringstream out;
  out << (model.kind == ModelKind::Bayes ? "BAYES" : "MARKOV") << '\n';
  out << model.cards.size() << '\n';
  for (std::size_t i = 0; i < model.cards.size(); ++i)
    out << (i ? " " : "") << model.cards[i];
  out << '\n' << model.factors.size() << '\n';
  for (const Factor& f : model.factors) {
    out << f.scope.size();
    for (VarId v : f.scope) out << ' ' << v;
    out << '\n';
  }
  for (const Factor& f : model.factors) {
    out << '\n' << f.size() << '\n';
    for (std::size_t i = 0; i < f.size(); ++i)
      out << (i ? " " : "") << format_entry(f.log_values[i]);
    out << '\n';
  }
  return out.str();
}

Evidence parse_evidence(std::string_view text) {
  Tokenizer tok(text);
  Evidence ev;
  if (tok.at_end()) return ev;
  const long long n = tok.next_int();
  if (n < 0) throw ParseError("negative evidence count", tok.line());
  for (long long i = 0; i < n; ++i) {
    const long long v = tok.next_int();
    const long long s = tok.next_int();
    if (v < 0 || s < 0) throw ParseError("negative evidence entry", tok.line());
    ev.assignments[static_cast<VarId>(v)] = static_cast<int>(s);
  }
  if (!tok.at_end()) throw ParseError("trailing tokens after evidence", tok.line());
  return ev;
}

Evidence read_evidence_file(const std::string& path) { return parse_evidence(slurp(path)); }

Model apply_evidence(const Model& model, const Evidence& ev) {
  for (const auto& [v, s] : ev.assignments) {
    if (v < 0 || v >= model.num_vars())
      throw InvalidArgument("evidence on unknown variable " + std::to_string(v));
    if (s < 0 || s >= model.cards[static_cast<std::size_t>(v)])
      throw InvalidArgument("evidence state " + std::to_string(s) + " out of range for variable " +
                            std::to_string(v));
  }
  Model out = model;
  for (Factor& f : out.factors) {
    for (const auto& [v, s] : ev.assignments) {
      if (f.has(v)) f = slice(f, v, s);
    }
  }
  for (const auto& [v, s] : ev.assignments) out.cards[static_cast<std::size_t>(v)] = 1;
  return out;
}

Components connected_components(const Model& model) {
  const std::size_t n = model.cards.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Factor& f : model.factors) {
    for (std::size_t i = 1; i < f.scope.size(); ++i) {
      auto a = find(static_cast<std::size_t>(f.scope[0]));
      auto b = find(static_cast<std::size_t>(f.scope[i]));
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  Components out;
  const VarSet used = model.used_vars();
  for (std::size_t v = 0; v < n; ++v) {
    if (!contains(used, static_cast<VarId>(v)))
      out.scalar_log_mass += std::log(static_cast<double>(model.cards[v]));
  }
  // Components are numbered by their smallest variable id.
  std::vector<int> index(n, -1);
  for (VarId v : used) {
    const std::size_t r = find(static_cast<std::size_t>(v));
    if (index[r] < 0) {
      index[r] = static_cast<int>(out.parts.size());
      Model part;
      part.kind = model.kind;
      part.cards = model.cards;
      out.parts.push_back(std::move(part));
      out.vars.emplace_back();
    }
    out.vars[static_cast<std::size_t>(index[r])].push_back(v);
  }
  for (const Factor& f : model.factors) {
    if (f.scope.empty()) {
      out.scalar_log_mass += f.log_values[0];
      continue;
    }
    const std::size_t r = find(static_cast<std::size_t>(f.scope[0]));
    out.parts[static_cast<std::size_t>(index[r])].factors.push_back(f);
  }
  return out;
}

}  // namespace ibia
