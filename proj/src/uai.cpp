#include "atb/uai.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace atb {
namespace {

struct Token {
  std::string_view text;
  std::size_t line = 0;
};

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }

  Token next(const char* what) {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(std::string("unexpected end of input, expected ") + what, line_);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    return {text_.substr(start, pos_ - start), line_};
  }

  std::size_t next_size(const char* what) {
    const Token t = next(what);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size())
      throw ParseError(std::string("expected ") + what + ", got '" + std::string(t.text) + "'", t.line);
    return value;
  }

  double next_double(const char* what, std::size_t* line = nullptr) {
    const Token t = next(what);
    if (line) *line = t.line;
    std::string s(t.text);
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(value))
      throw ParseError(std::string("expected ") + what + ", got '" + s + "'", t.line);
    return value;
  }

  std::size_t line() const { return line_; }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

BayesianNetwork parse_network(std::string_view text) {
  Tokenizer tok(text);
  const Token header = tok.next("BAYES header");
  if (header.text != "BAYES")
    throw ParseError("expected 'BAYES' header, got '" + std::string(header.text) + "'", header.line);

  const std::size_t n = tok.next_size("variable count");
  std::vector<Variable> vars;
  vars.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t line = tok.line();
    const std::size_t card = tok.next_size("cardinality");
    if (card < 1) throw ParseError("variable " + std::to_string(i) + " has cardinality 0", line);
    vars.push_back({i, std::to_string(i), card});
  }

  const std::size_t factors = tok.next_size("factor count");
  if (factors != n)
    throw ParseError("factor count " + std::to_string(factors) + " does not match variable count " +
                         std::to_string(n),
                     tok.line());

  struct Scope {
    std::vector<VarId> vars;
    std::size_t line;
  };
  std::vector<Scope> scopes(factors);
  std::vector<bool> has_cpt(n, false);
  for (std::size_t f = 0; f < factors; ++f) {
    const std::size_t line = tok.line();
    const std::size_t k = tok.next_size("scope size");
    if (k == 0) throw ParseError("factor " + std::to_string(f) + " has an empty scope", line);
    scopes[f].line = line;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t sl = tok.line();
      const std::size_t v = tok.next_size("scope variable");
      if (v >= n)
        throw ParseError("factor " + std::to_string(f) + ": variable index " + std::to_string(v) + " out of range",
                         sl);
      scopes[f].vars.push_back(v);
    }
    const VarId child = scopes[f].vars.back();
    if (has_cpt[child])
      throw ParseError("variable " + std::to_string(child) + " is the child of more than one factor", line);
    has_cpt[child] = true;
  }

  std::vector<Cpt> cpts;
  cpts.reserve(factors);
  for (std::size_t f = 0; f < factors; ++f) {
    const auto& scope = scopes[f].vars;
    const VarId child = scope.back();
    std::vector<VarId> parents(scope.begin(), scope.end() - 1);
    std::vector<std::size_t> pcards;
    std::size_t expected = vars[child].cardinality;
    for (VarId p : parents) {
      pcards.push_back(vars[p].cardinality);
      expected *= vars[p].cardinality;
    }
    const std::size_t block_line = tok.line();
    const std::size_t m = tok.next_size("table size");
    if (m != expected)
      throw ParseError("factor " + std::to_string(f) + " (child " + std::to_string(child) + "): table size " +
                           std::to_string(m) + ", expected " + std::to_string(expected),
                       block_line);
    std::vector<double> table(m);
    const std::size_t card = vars[child].cardinality;
    std::size_t row_line = 0;
    double row_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t line = 0;
      table[i] = tok.next_double("probability", &line);
      if (i % card == 0) {
        row_line = line;
        row_sum = 0.0;
      }
      if (table[i] < 0.0 || table[i] > 1.0)
        throw ParseError("factor " + std::to_string(f) + " (child " + std::to_string(child) +
                             "): probability outside [0,1]",
                         line);
      row_sum += table[i];
      if (i % card == card - 1 && std::abs(row_sum - 1.0) > kRowSumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "cpt of variable " << child << " (factor " << f << ") row " << i / card << " sums to " << row_sum
           << ", not 1";
        throw ParseError(os.str(), row_line);
      }
    }
    cpts.emplace_back(child, card, std::move(parents), std::move(pcards), std::move(table));
  }
  if (!tok.done()) throw ParseError("trailing content after last table", tok.line());

  try {
    return BayesianNetwork(std::move(vars), std::move(cpts));
  } catch (const ModelError& e) {
    throw ParseError(e.what(), tok.line());
  }
}

Evidence parse_evidence(std::string_view text) {
  Tokenizer tok(text);
  const std::size_t m = tok.next_size("evidence count");
  Evidence e;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t line = tok.line();
    const std::size_t v = tok.next_size("evidence variable");
    const std::size_t x = tok.next_size("evidence value");
    if (e.contains(v)) throw ParseError("duplicate evidence for variable " + std::to_string(v), line);
    e.set(v, x);
  }
  if (!tok.done()) throw ParseError("trailing content after evidence pairs", tok.line());
  return e;
}

Evidence parse_evidence(std::string_view text, const BayesianNetwork& bn) {
  Evidence e = parse_evidence(text);
  try {
    e.validate(bn);
  } catch (const ModelError& err) {
    throw ParseError(err.what(), 1);
  }
  return e;
}

std::string write_network(const BayesianNetwork& bn) {
  std::ostringstream os;
  os.precision(17);
  os << "BAYES\n" << bn.size() << "\n";
  for (VarId v = 0; v < bn.size(); ++v) os << (v ? " " : "") << bn.cardinality(v);
  os << "\n" << bn.size() << "\n";
  for (VarId v = 0; v < bn.size(); ++v) {
    const auto& ps = bn.parents(v);
    os << ps.size() + 1;
    for (VarId p : ps) os << " " << p;
    os << " " << v << "\n";
  }
  for (VarId v = 0; v < bn.size(); ++v) {
    const Cpt& c = bn.cpt(v);
    os << "\n" << c.table().size() << "\n";
    for (std::size_t r = 0; r < c.rows(); ++r) {
      for (Value x = 0; x < c.child_cardinality(); ++x) os << " " << c.at(r, x);
      os << "\n";
    }
  }
  return os.str();
}

std::string write_evidence(const Evidence& e) {
  std::ostringstream os;
  os << e.size();
  for (auto [v, x] : e) os << " " << v << " " << x;
  os << "\n";
  return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace atb
