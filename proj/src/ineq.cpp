#include "stabhom/ineq.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "stabhom/errors.hpp"
#include "stabhom/statevec.hpp"

namespace stabhom {

// ---------------------------------------------------------------------------
// Symbols

std::string SettingSymbol::str() const {
  std::string out(1, base);
  out += std::to_string(site);
  out.append(static_cast<std::size_t>(primes), '\'');
  return out;
}

SettingSymbol SettingSymbol::parse(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos >= text.size() || !std::isupper(static_cast<unsigned char>(text[pos]))) {
    throw ParseError("setting must start with an uppercase letter", pos);
  }
  SettingSymbol s;
  s.base = text[pos++];
  const std::size_t digits = pos;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos == digits) throw ParseError("setting needs a site index", pos);
  s.site = std::stoi(std::string(text.substr(digits, pos - digits)));
  if (s.site < 1) throw ParseError("site indices start at 1", digits);
  while (pos < text.size() && text[pos] == '\'') {
    ++s.primes;
    ++pos;
  }
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) throw ParseError("unexpected trailing text after setting", pos);
  return s;
}

int InequalityAST::max_site() const {
  int m = 0;
  for (const auto& t : linear) {
    for (const auto& s : t.monomial) m = std::max(m, s.site);
  }
  for (const auto& sq : squares) {
    for (const auto& t : sq.inner) {
      for (const auto& s : t.monomial) m = std::max(m, s.site);
    }
  }
  return m;
}

std::set<SettingSymbol> InequalityAST::settings() const {
  std::set<SettingSymbol> out;
  for (const auto& t : linear) out.insert(t.monomial.begin(), t.monomial.end());
  for (const auto& sq : squares) {
    for (const auto& t : sq.inner) out.insert(t.monomial.begin(), t.monomial.end());
  }
  return out;
}

InequalityAST InequalityAST::linear_part() const {
  InequalityAST out = *this;
  out.squares.clear();
  return out;
}

// ---------------------------------------------------------------------------
// Canonical form

namespace {

std::vector<LinearTerm> collect(const std::vector<LinearTerm>& terms) {
  std::map<Monomial, Rational> acc;
  for (const auto& t : terms) acc[t.monomial] += t.coefficient;
  std::vector<LinearTerm> out;
  for (const auto& [m, c] : acc) {
    if (!c.is_zero()) out.push_back({c, m});
  }
  return out;
}

std::string monomial_text(const Monomial& m) {
  std::string out;
  for (const auto& s : m) {
    if (!out.empty()) out += "*";
    out += s.str();
  }
  return out;
}

void append_term(std::string& out, const Rational& c, const std::string& body) {
  if (out.empty()) {
    if (c.sign() < 0) out += "-";
  } else {
    out += c.sign() < 0 ? " - " : " + ";
  }
  const Rational m = c.abs();
  if (body.empty()) {
    out += m.str();
  } else if (m == Rational(1)) {
    out += c.sign() > 0 ? body : "1*" + body;
  } else {
    out += m.str() + "*" + body;
  }
}

std::string linear_text(const std::vector<LinearTerm>& terms) {
  std::string out;
  for (const auto& t : terms) append_term(out, t.coefficient, monomial_text(t.monomial));
  return out;
}

}  // namespace

InequalityAST canonicalize(const InequalityAST& ast) {
  InequalityAST out;
  out.relation = ast.relation;
  out.bound = ast.bound;
  out.linear = collect(ast.linear);

  std::map<std::string, SquareTerm> squares;
  for (const auto& sq : ast.squares) {
    std::vector<LinearTerm> inner = collect(sq.inner);
    if (inner.empty() || sq.coefficient.is_zero()) continue;
    // (-e)^2 = e^2: make the leading inner coefficient positive.
    if (inner.front().coefficient.sign() < 0) {
      for (auto& t : inner) t.coefficient = -t.coefficient;
    }
    const std::string key = linear_text(inner);
    auto it = squares.find(key);
    if (it == squares.end()) {
      squares.emplace(key, SquareTerm{sq.coefficient, inner});
    } else {
      it->second.coefficient += sq.coefficient;
    }
  }
  for (auto& [key, sq] : squares) {
    if (!sq.coefficient.is_zero()) out.squares.push_back(std::move(sq));
  }
  return out;
}

std::string format_expression(const InequalityAST& ast) {
  const InequalityAST c = canonicalize(ast);
  std::string out = linear_text(c.linear);
  for (const auto& sq : c.squares) append_term(out, sq.coefficient, "sq(" + linear_text(sq.inner) + ")");
  return out.empty() ? "0" : out;
}

std::string pretty_print(const InequalityAST& ast) {
  std::string out = format_expression(ast);
  if (ast.bound) {
    out += ast.relation == Relation::LessEqual ? " <= " : " < ";
    out += ast.bound->str();
  }
  return out;
}

std::string to_ineq_file(const Inequality& ineq) {
  std::string out;
  if (!ineq.name.empty()) out += "name: " + ineq.name + "\n";
  if (!ineq.provenance.empty()) out += "provenance: " + ineq.provenance + "\n";
  out += pretty_print(ineq.ast) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Number, Setting, Sq, Plus, Minus, Star, Slash, LParen, RParen, Le, Lt, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(s[i + 1]))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      out.push_back({Tok::Number, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      ++i;
      const std::size_t digits = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i == digits) throw ParseError(std::string("setting '") + c + "' needs a site index", digits);
      while (i < s.size() && s[i] == '\'') ++i;
      out.push_back({Tok::Setting, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (s.substr(i, 2) == "sq") {
      i += 2;
      out.push_back({Tok::Sq, "sq", start});
      continue;
    }
    if (s.substr(i, 2) == "<=") {
      i += 2;
      out.push_back({Tok::Le, "<=", start});
      continue;
    }
    Tok kind;
    switch (c) {
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case '/': kind = Tok::Slash; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '<': kind = Tok::Lt; break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    ++i;
    out.push_back({kind, std::string(1, c), start});
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

struct Poly {
  std::map<Monomial, Rational> lin;
  std::vector<SquareTerm> squares;

  bool is_constant() const {
    if (!squares.empty()) return false;
    for (const auto& [m, c] : lin) {
      if (!m.empty() && !c.is_zero()) return false;
    }
    return true;
  }
  Rational constant() const {
    auto it = lin.find(Monomial{});
    return it == lin.end() ? Rational(0) : it->second;
  }
};

Poly constant_poly(const Rational& r) {
  Poly p;
  p.lin[Monomial{}] = r;
  return p;
}

void add_into(Poly& a, const Poly& b, const Rational& scale) {
  for (const auto& [m, c] : b.lin) a.lin[m] += c * scale;
  for (const auto& sq : b.squares) a.squares.push_back({sq.coefficient * scale, sq.inner});
}

Poly scale_poly(const Poly& p, const Rational& s) {
  Poly out;
  add_into(out, p, s);
  return out;
}

Monomial merge(const Monomial& a, const Monomial& b, std::size_t pos) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].site < b[j].site)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].site < a[i].site) {
      out.push_back(b[j++]);
    } else {
      throw ParseError("duplicate site " + std::to_string(a[i].site) + " in monomial (" + a[i].str() + " and " +
                           b[j].str() + ")",
                       pos);
    }
  }
  return out;
}

Poly multiply_poly(const Poly& a, const Poly& b, std::size_t pos) {
  if (!a.squares.empty() || !b.squares.empty()) {
    if (a.is_constant()) return scale_poly(b, a.constant());
    if (b.is_constant()) return scale_poly(a, b.constant());
    throw ParseError("a squared term may only be multiplied by a constant", pos);
  }
  Poly out;
  for (const auto& [ma, ca] : a.lin) {
    for (const auto& [mb, cb] : b.lin) out.lin[merge(ma, mb, pos)] += ca * cb;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  Poly expression() {
    Poly result;
    Rational sign(1);
    if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      if (next().kind == Tok::Minus) sign = Rational(-1);
    }
    add_into(result, term(), sign);
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Rational s = next().kind == Tok::Minus ? Rational(-1) : Rational(1);
      add_into(result, term(), s);
    }
    return result;
  }

  Rational signed_number() {
    Rational sign(1);
    if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      if (next().kind == Tok::Minus) sign = Rational(-1);
    }
    if (peek().kind != Tok::Number) throw ParseError("expected a number", peek().pos);
    return sign * number();
  }

  const Token& peek() const { return toks_[idx_]; }
  const Token& next() { return toks_[idx_++]; }

 private:
  static bool starts_factor(Tok k) {
    return k == Tok::Number || k == Tok::Setting || k == Tok::Sq || k == Tok::LParen;
  }

  Poly term() {
    if (!starts_factor(peek().kind)) {
      throw ParseError(peek().kind == Tok::End ? "unexpected end of expression" : "expected a term, found '" +
                                                                                     peek().text + "'",
                       peek().pos);
    }
    Poly acc = factor();
    for (;;) {
      const std::size_t pos = peek().pos;
      if (peek().kind == Tok::Star) {
        next();
        if (!starts_factor(peek().kind)) throw ParseError("expected a factor after '*'", peek().pos);
        acc = multiply_poly(acc, factor(), pos);
      } else if (starts_factor(peek().kind)) {
        acc = multiply_poly(acc, factor(), pos);
      } else {
        return acc;
      }
    }
  }

  Rational number() {
    const Token& t = next();
    Rational value;
    try {
      value = Rational::parse(t.text);
    } catch (const Error& e) {
      throw ParseError(e.what(), t.pos);
    }
    if (peek().kind == Tok::Slash) {
      const std::size_t slash = next().pos;
      if (peek().kind != Tok::Number) throw ParseError("expected a denominator after '/'", slash + 1);
      const Token& d = next();
      const Rational den = Rational::parse(d.text);
      if (den.is_zero()) throw ParseError("zero denominator", d.pos);
      value = value / den;
    }
    return value;
  }

  Poly factor() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: return constant_poly(number());
      case Tok::Setting: {
        next();
        Poly p;
        p.lin[Monomial{SettingSymbol::parse(t.text)}] = Rational(1);
        return p;
      }
      case Tok::Sq: {
        next();
        if (peek().kind != Tok::LParen) throw ParseError("expected '(' after sq", peek().pos);
        next();
        const Poly inner = expression();
        if (!inner.squares.empty()) throw ParseError("nested squares are not allowed", t.pos);
        expect_rparen();
        SquareTerm sq{Rational(1), {}};
        for (const auto& [m, c] : inner.lin) {
          if (!c.is_zero()) sq.inner.push_back({c, m});
        }
        if (sq.inner.empty()) throw ParseError("squared expression is empty", t.pos);
        Poly p;
        p.squares.push_back(std::move(sq));
        return p;
      }
      case Tok::LParen: {
        next();
        Poly inner = expression();
        expect_rparen();
        return inner;
      }
      default: throw ParseError("expected a factor", t.pos);
    }
  }

  void expect_rparen() {
    if (peek().kind != Tok::RParen) throw ParseError("expected ')'", peek().pos);
    next();
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
};

InequalityAST to_ast(const Poly& p, std::size_t end_pos) {
  InequalityAST ast;
  for (const auto& [m, c] : p.lin) {
    if (!c.is_zero()) ast.linear.push_back({c, m});
  }
  ast.squares = p.squares;
  ast = canonicalize(ast);
  if (ast.linear.empty() && ast.squares.empty()) throw ParseError("expression has no terms", end_pos);
  return ast;
}

// Where a piece of the joined expression body came from.
struct Segment {
  std::size_t body_start;
  int line;
  std::size_t column;  // 0-based column of the piece in its line
};

std::string strip_headers(std::string_view text, std::string* name, std::string* provenance,
                          std::vector<Segment>* segments = nullptr) {
  std::string body;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string content = line.substr(b, e - b + 1);
    auto header = [&](const char* key, std::string* out) {
      const std::size_t n = std::char_traits<char>::length(key);
      if (content.compare(0, n, key) != 0) return false;
      if (out) {
        const std::string rest = content.substr(n);
        const auto rb = rest.find_first_not_of(" \t");
        *out = rb == std::string::npos ? std::string() : rest.substr(rb);
      }
      return true;
    };
    if (header("name:", name) || header("provenance:", provenance)) continue;
    if (!body.empty()) body += " ";
    if (segments) segments->push_back({body.size(), line_no, b});
    body += content;
  }
  return body;
}

[[noreturn]] void rethrow_located(const ParseError& e, const std::vector<Segment>& segments, bool multiline) {
  if (!multiline || segments.empty()) throw e;
  std::size_t k = 0;
  while (k + 1 < segments.size() && segments[k + 1].body_start <= e.position()) ++k;
  const Segment& s = segments[k];
  const std::size_t offset = e.position() >= s.body_start ? e.position() - s.body_start : 0;
  throw ParseError(e.reason(), e.position(), s.line, static_cast<int>(s.column + offset + 1));
}

Inequality parse_body(const std::string& body, Inequality out) {
  Parser p(body);
  const Poly lhs = p.expression();
  const Token rel = p.next();
  if (rel.kind != Tok::Le && rel.kind != Tok::Lt) {
    throw ParseError(rel.kind == Tok::End ? "missing relation '<=' or '<'" : "expected '<=' or '<', found '" + rel.text + "'",
                     rel.pos);
  }
  const Rational bound = p.signed_number();
  if (p.peek().kind != Tok::End) throw ParseError("unexpected text after the bound", p.peek().pos);
  out.ast = to_ast(lhs, rel.pos);
  out.ast.relation = rel.kind == Tok::Le ? Relation::LessEqual : Relation::Less;
  out.ast.bound = bound;
  return out;
}

}  // namespace

Inequality parse(std::string_view text) {
  std::vector<Segment> segments;
  Inequality out;
  const std::string body = strip_headers(text, &out.name, &out.provenance, &segments);
  try {
    return parse_body(body, std::move(out));
  } catch (const ParseError& e) {
    rethrow_located(e, segments, text.find('\n') != std::string_view::npos);
  }
}

InequalityAST parse_expression(std::string_view text) {
  const std::string body = strip_headers(text, nullptr, nullptr);
  Parser p(body);
  const Poly lhs = p.expression();
  if (p.peek().kind != Tok::End) throw ParseError("unexpected text after the expression", p.peek().pos);
  return to_ast(lhs, body.size());
}

// ---------------------------------------------------------------------------
// Relabeling symmetry

namespace {

struct SignedSymbol {
  SettingSymbol symbol;
  int sign;
};

InequalityAST relabel(const InequalityAST& ast, const std::map<SettingSymbol, SignedSymbol>& map) {
  auto convert = [&](const std::vector<LinearTerm>& terms) {
    std::vector<LinearTerm> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
      LinearTerm n{t.coefficient, {}};
      for (const auto& s : t.monomial) {
        const auto& target = map.at(s);
        n.monomial.push_back(target.symbol);
        if (target.sign < 0) n.coefficient = -n.coefficient;
      }
      std::sort(n.monomial.begin(), n.monomial.end());
      out.push_back(std::move(n));
    }
    return out;
  };
  InequalityAST out;
  out.linear = convert(ast.linear);
  for (const auto& sq : ast.squares) out.squares.push_back({sq.coefficient, convert(sq.inner)});
  return out;
}

}  // namespace

std::string canonical_up_to_relabeling(const InequalityAST& ast) {
  std::map<int, std::vector<SettingSymbol>> by_site;
  for (const auto& s : ast.settings()) by_site[s.site].push_back(s);

  struct SiteGroup {
    std::vector<SettingSymbol> symbols;
    std::vector<std::vector<int>> perms;
    std::size_t size() const { return perms.size() << symbols.size(); }
  };
  std::vector<SiteGroup> groups;
  double total = 1.0;
  for (auto& [site, syms] : by_site) {
    SiteGroup g{syms, {}};
    std::vector<int> perm(syms.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
      g.perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    total *= static_cast<double>(g.size());
    groups.push_back(std::move(g));
  }
  if (total > 2e6) throw CapacityError("relabeling group too large for canonical comparison");

  std::vector<std::size_t> counter(groups.size(), 0);
  std::string best;
  bool first = true;
  for (;;) {
    std::map<SettingSymbol, SignedSymbol> map;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& grp = groups[g];
      const std::size_t k = grp.symbols.size();
      const std::size_t perm_index = counter[g] >> k;
      const std::size_t sign_bits = counter[g] & ((std::size_t{1} << k) - 1);
      for (std::size_t i = 0; i < k; ++i) {
        map[grp.symbols[i]] = {grp.symbols[grp.perms[perm_index][i]], ((sign_bits >> i) & 1) ? -1 : 1};
      }
    }
    const std::string text = format_expression(relabel(ast, map));
    if (first || text < best) {
      best = text;
      first = false;
    }
    std::size_t g = 0;
    for (; g < groups.size(); ++g) {
      if (++counter[g] < groups[g].size()) break;
      counter[g] = 0;
    }
    if (g == groups.size()) break;
  }
  return best;
}

bool equivalent_up_to_relabeling(const InequalityAST& a, const InequalityAST& b) {
  if (a.settings() != b.settings()) return false;
  return canonical_up_to_relabeling(a) == canonical_up_to_relabeling(b);
}

// ---------------------------------------------------------------------------
// Local observables and operator realization

LocalObservable LocalObservable::pauli(Letter letter, int sign) {
  if (letter == Letter::I) throw DomainError("the identity is not a dichotomic setting");
  LocalObservable o;
  o.bloch = {0.0, 0.0, 0.0};
  o.bloch[static_cast<int>(letter) - 1] = sign >= 0 ? 1.0 : -1.0;
  return o;
}

LocalObservable LocalObservable::from_bloch(std::array<double, 3> v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (!(n > 1e-12)) throw DomainError("Bloch vector must be nonzero");
  LocalObservable o;
  for (int k = 0; k < 3; ++k) o.bloch[k] = v[k] / n;
  return o;
}

namespace {

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

// Parses "aX+bY-Z" style combinations into a Bloch vector.
std::array<double, 3> parse_combination(const std::string& s) {
  std::array<double, 3> v{0, 0, 0};
  std::size_t i = 0;
  bool any = false;
  while (i < s.size()) {
    double sign = 1.0;
    while (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      if (s[i] == '-') sign = -sign;
      ++i;
    }
    double coef = 1.0;
    if (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
      std::size_t used = 0;
      coef = std::stod(s.substr(i), &used);
      i += used;
      if (i < s.size() && s[i] == '*') ++i;
    }
    if (i >= s.size() || (s[i] != 'X' && s[i] != 'Y' && s[i] != 'Z')) {
      throw DomainError("observable combination must use the letters X, Y and Z: '" + s + "'");
    }
    v[static_cast<int>(letter_from_char(s[i])) - 1] += sign * coef;
    ++i;
    any = true;
  }
  if (!any) throw DomainError("empty observable");
  return v;
}

}  // namespace

LocalObservable LocalObservable::parse(std::string_view text) {
  std::string s = strip_spaces(text);
  if (s.rfind("bloch(", 0) == 0 && s.back() == ')') {
    std::array<double, 3> v{};
    std::string inner = s.substr(6, s.size() - 7);
    std::istringstream in(inner);
    std::string part;
    int k = 0;
    while (std::getline(in, part, ',')) {
      if (k >= 3) throw DomainError("bloch() takes three components");
      v[k++] = std::stod(part);
    }
    if (k != 3) throw DomainError("bloch() takes three components");
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (std::abs(n - 1.0) > 1e-9) throw DomainError("Bloch vector must have unit length");
    LocalObservable o;
    o.bloch = v;
    return o;
  }
  double sign = 1.0;
  std::size_t i = 0;
  while (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    if (s[i] == '-') sign = -sign;
    ++i;
  }
  s = s.substr(i);
  double divisor = 1.0;
  std::array<double, 3> v{};
  if (!s.empty() && s.front() == '(') {
    const auto close = s.find(')');
    if (close == std::string::npos) throw DomainError("unbalanced parenthesis in observable");
    v = parse_combination(s.substr(1, close - 1));
    const std::string tail = s.substr(close + 1);
    if (!tail.empty()) {
      if (tail.rfind("/sqrt", 0) != 0) throw DomainError("unexpected text after observable: '" + tail + "'");
      std::string arg = tail.substr(5);
      if (!arg.empty() && arg.front() == '(' && arg.back() == ')') arg = arg.substr(1, arg.size() - 2);
      divisor = std::sqrt(std::stod(arg));
    }
  } else {
    v = parse_combination(s);
  }
  for (auto& c : v) c = sign * c / divisor;
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (std::abs(n - 1.0) > 1e-9) throw DomainError("observable '" + std::string(text) + "' does not square to identity");
  LocalObservable o;
  o.bloch = v;
  return o;
}

std::optional<std::pair<Letter, int>> LocalObservable::as_pauli() const {
  int axis = -1;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(bloch[k]) > 1e-12) {
      if (axis >= 0) return std::nullopt;
      axis = k;
    }
  }
  if (axis < 0 || std::abs(std::abs(bloch[axis]) - 1.0) > 1e-12) return std::nullopt;
  return std::make_pair(static_cast<Letter>(axis + 1), bloch[axis] > 0 ? 1 : -1);
}

std::string LocalObservable::str() const {
  if (auto p = as_pauli()) return std::string(p->second < 0 ? "-" : "") + letter_char(p->first);
  const char letters[3] = {'X', 'Y', 'Z'};
  std::string combo;
  int nonzero = 0;
  bool halves = true;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(bloch[k]) < 1e-12) continue;
    ++nonzero;
    if (std::abs(std::abs(bloch[k]) - M_SQRT1_2) > 1e-12) halves = false;
    if (bloch[k] < 0) {
      combo += "-";
    } else if (!combo.empty()) {
      combo += "+";
    }
    combo += letters[k];
  }
  if (nonzero == 2 && halves) return "(" + combo + ")/sqrt2";
  char buf[128];
  std::snprintf(buf, sizeof buf, "bloch(%.17g,%.17g,%.17g)", bloch[0], bloch[1], bloch[2]);
  return buf;
}

Eigen::Matrix2cd LocalObservable::matrix() const {
  Eigen::Matrix2cd m;
  m << bloch[2], Complex(bloch[0], -bloch[1]), Complex(bloch[0], bloch[1]), -bloch[2];
  return m;
}

PauliSum LocalObservable::on_site(int width, int site_index) const {
  PauliSum out(width);
  for (int k = 0; k < 3; ++k) {
    if (bloch[k] != 0.0) out.add(bloch[k], PauliString::single(width, site_index, static_cast<Letter>(k + 1)));
  }
  return out;
}

Assignment parse_assignment(std::string_view text) {
  Assignment out;
  std::vector<std::string> items;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if ((c == ';' || c == ',') && depth == 0) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  items.push_back(cur);
  for (const auto& item : items) {
    if (strip_spaces(item).empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw DomainError("assignment entries look like A1=X: '" + item + "'");
    const SettingSymbol s = SettingSymbol::parse(item.substr(0, eq));
    out[s] = LocalObservable::parse(item.substr(eq + 1));
  }
  return out;
}

std::string format_assignment(const Assignment& a) {
  std::string out;
  for (const auto& [s, o] : a) {
    if (!out.empty()) out += ";";
    out += s.str() + "=" + o.str();
  }
  return out;
}

PauliSum realize_terms(const std::vector<LinearTerm>& terms, const Assignment& assignment, int width) {
  PauliSum out(width);
  std::map<SettingSymbol, PauliSum> cache;
  auto local = [&](const SettingSymbol& s) -> const PauliSum& {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    if (s.site > width) throw DimensionError("setting " + s.str() + " lies outside width " + std::to_string(width));
    auto a = assignment.find(s);
    LocalObservable obs;
    if (a != assignment.end()) {
      obs = a->second;
    } else if (s.is_fixed_pauli()) {
      obs = LocalObservable::pauli(letter_from_char(s.base));
    } else {
      throw DomainError("missing assignment for setting " + s.str());
    }
    return cache.emplace(s, obs.on_site(width, s.site - 1)).first->second;
  };
  for (const auto& t : terms) {
    PauliSum prod(width);
    prod.add(t.coefficient.to_double(), PauliString::identity(width));
    for (const auto& s : t.monomial) prod = multiply(prod, local(s));
    out.add(prod);
  }
  return out.pruned(1e-14);
}

OperatorExpression assign_paulis(const InequalityAST& ast, const Assignment& assignment, int width) {
  if (width == 0) width = std::max(1, ast.max_site());
  if (width < ast.max_site()) throw DimensionError("width is smaller than the largest site in the expression");
  OperatorExpression out;
  out.width = width;
  out.linear = realize_terms(ast.linear, assignment, width);
  for (const auto& sq : ast.squares) {
    out.squares.push_back({sq.coefficient.to_double(), realize_terms(sq.inner, assignment, width)});
  }
  return out;
}

double OperatorExpression::value(const Eigen::VectorXcd& psi) const {
  double v = linear.empty() ? 0.0 : expectation(psi, linear);
  for (const auto& sq : squares) {
    const double m = expectation(psi, sq.inner);
    v += sq.coefficient * m * m;
  }
  return v;
}

}  // namespace stabhom
