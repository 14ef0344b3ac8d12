#include "radt/boolean_network.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "radt/errors.hpp"

namespace radt {

struct BooleanNetwork::Expr {
  enum class Kind { Var, Not, And, Or } kind;
  int var = -1;
  std::shared_ptr<const Expr> lhs, rhs;

  bool eval(const GeneState& s) const {
    switch (kind) {
      case Kind::Var: return s[var] != 0;
      case Kind::Not: return !lhs->eval(s);
      case Kind::And: return lhs->eval(s) && rhs->eval(s);
      case Kind::Or: return lhs->eval(s) || rhs->eval(s);
    }
    return false;
  }
};

namespace {

using Expr = BooleanNetwork::Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Token {
  enum class Kind { Ident, And, Or, Not, LParen, RParen, End } kind;
  std::string text;
};

std::vector<Token> tokenize(const std::string& text, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({Token::Kind::LParen, "("});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::Kind::RParen, ")"});
      ++i;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
               c == '.' || c == '/' || c == '-') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_' || text[j] == '.' || text[j] == '/' || text[j] == '-'))
        ++j;
      std::string word = text.substr(i, j - i);
      if (word == "AND")
        out.push_back({Token::Kind::And, word});
      else if (word == "OR")
        out.push_back({Token::Kind::Or, word});
      else if (word == "NOT")
        out.push_back({Token::Kind::Not, word});
      else
        out.push_back({Token::Kind::Ident, word});
      i = j;
    } else {
      throw ParseError(std::string("unexpected character '") + c +
                           "' in rule expression",
                       line_no);
    }
  }
  out.push_back({Token::Kind::End, ""});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens,
         const std::unordered_map<std::string, int>& index, int line_no)
      : tokens_(std::move(tokens)), index_(index), line_(line_no) {}

  ExprPtr parse() {
    ExprPtr e = parse_or();
    expect(Token::Kind::End, "end of expression");
    return e;
  }

 private:
  // OR has the lowest precedence, then AND, then NOT.
  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (peek().kind == Token::Kind::Or) {
      advance();
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::Or;
      node->lhs = lhs;
      node->rhs = parse_and();
      lhs = node;
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_factor();
    while (peek().kind == Token::Kind::And) {
      advance();
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::And;
      node->lhs = lhs;
      node->rhs = parse_factor();
      lhs = node;
    }
    return lhs;
  }

  ExprPtr parse_factor() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Not) {
      advance();
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::Not;
      node->lhs = parse_factor();
      return node;
    }
    if (t.kind == Token::Kind::LParen) {
      advance();
      ExprPtr inner = parse_or();
      expect(Token::Kind::RParen, "')'");
      return inner;
    }
    if (t.kind == Token::Kind::Ident) {
      auto it = index_.find(t.text);
      if (it == index_.end())
        throw ParseError("unknown gene name '" + t.text + "'", line_);
      advance();
      auto node = std::make_shared<Expr>();
      node->kind = Expr::Kind::Var;
      node->var = it->second;
      return node;
    }
    throw ParseError("unexpected token '" + t.text + "' in rule expression", line_);
  }

  const Token& peek() const { return tokens_[pos_]; }
  void advance() { ++pos_; }
  void expect(Token::Kind kind, const std::string& what) {
    if (peek().kind != kind)
      throw ParseError("expected " + what + " in rule expression", line_);
    advance();
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const std::unordered_map<std::string, int>& index_;
  int line_;
};

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool is_blank(const std::string& s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

BooleanNetwork BooleanNetwork::from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::pair<int, std::pair<std::string, std::string>>> raw;  // line, (name, rhs)
  while (std::getline(in, line)) {
    ++line_no;
    std::string body = strip_comment(line);
    if (is_blank(body)) continue;
    auto pos = body.find(":=");
    if (pos == std::string::npos)
      throw ParseError("rule line must contain ':='", line_no);
    std::string name = body.substr(0, pos);
    // trim
    auto l = name.find_first_not_of(" \t");
    auto r = name.find_last_not_of(" \t");
    if (l == std::string::npos) throw ParseError("missing gene name", line_no);
    name = name.substr(l, r - l + 1);
    raw.push_back({line_no, {name, body.substr(pos + 2)}});
  }
  if (raw.empty()) throw ParseError("rules file defines no genes", 1);

  BooleanNetwork net;
  std::unordered_map<std::string, int> index;
  for (const auto& [ln, nv] : raw) {
    if (index.count(nv.first))
      throw ParseError("duplicate rule for gene '" + nv.first + "'", ln);
    index[nv.first] = static_cast<int>(net.names_.size());
    net.names_.push_back(nv.first);
  }
  for (const auto& [ln, nv] : raw) {
    Parser p(tokenize(nv.second, ln), index, ln);
    net.rules_.push_back(p.parse());
  }
  return net;
}

BooleanNetwork BooleanNetwork::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rules file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

bool BooleanNetwork::eval_rule(int gene, const GeneState& state) const {
  if (gene < 0 || gene >= n_genes()) throw ArgumentError("gene index out of range");
  if (static_cast<int>(state.size()) != n_genes())
    throw ArgumentError("state length does not match gene count");
  return rules_[gene]->eval(state);
}

void BooleanNetwork::async_update(GeneState& state, Rng& rng) const {
  int g = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_genes())));
  state[g] = eval_rule(g, state) ? 1 : 0;
}

bool BooleanNetwork::is_attractor(const GeneState& state) const {
  for (int g = 0; g < n_genes(); ++g)
    if ((state[g] != 0) != eval_rule(g, state)) return false;
  return true;
}

std::vector<GeneState> BooleanNetwork::enumerate_attractors() const {
  if (n_genes() > 20)
    throw ArgumentError("exhaustive attractor scan limited to 20 genes");
  std::vector<GeneState> out;
  const int n = n_genes();
  GeneState s(n, 0);
  for (std::uint32_t code = 0; code < (1u << n); ++code) {
    for (int g = 0; g < n; ++g) s[g] = (code >> g) & 1u;
    if (is_attractor(s)) out.push_back(s);
  }
  return out;
}

std::string BooleanNetwork::to_bitstring(const GeneState& state) const {
  std::string s(state.size(), '0');
  for (std::size_t i = 0; i < state.size(); ++i)
    if (state[i]) s[i] = '1';
  return s;
}

GeneState BooleanNetwork::from_bitstring(const std::string& bits) const {
  if (static_cast<int>(bits.size()) != n_genes())
    throw ArgumentError("bitstring length " + std::to_string(bits.size()) +
                        " does not match gene count " + std::to_string(n_genes()));
  GeneState s(bits.size(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      s[i] = 1;
    else if (bits[i] != '0')
      throw ArgumentError("bitstring must contain only 0/1 characters");
  }
  return s;
}

GeneState cardio_step(const BooleanNetwork& net, const GeneState& genes,
                      int gene_index, Rng& rng, int k) {
  if (gene_index < 0 || gene_index >= net.n_genes())
    throw ArgumentError("gene index out of range");
  if (k < 0) throw ArgumentError("k must be nonnegative");
  GeneState next = genes;
  next[gene_index] ^= 1;  // perturbation -> transient state
  for (int i = 0; i < k; ++i) net.async_update(next, rng);
  return next;
}

}  // namespace radt
