#include "evostmt/statement.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "evostmt/errors.hpp"
#include "evostmt/rng.hpp"

namespace evostmt {

ExprPtr Expr::atom(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Atom;
  e->text = std::move(name);
  return e;
}

ExprPtr Expr::opaque(std::string raw) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Opaque;
  e->text = std::move(raw);
  return e;
}

ExprPtr Expr::application(std::vector<ExprPtr> items) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Application;
  e->children = std::move(items);
  return e;
}

ExprPtr Expr::connective(ConnKind k, std::vector<ExprPtr> ops) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Connective;
  e->conn = k;
  e->children = std::move(ops);
  return e;
}

ExprPtr Expr::relation(RelKind k, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Relation;
  e->rel = k;
  e->children = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr Expr::arrow(ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Arrow;
  e->children = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr Expr::paren(ExprPtr child) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Paren;
  e->children = {std::move(child)};
  return e;
}

ExprPtr Expr::quantifier(QuantKind q, Binder b, ExprPtr body) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Quantifier;
  e->quant = q;
  e->qbinder = std::move(b);
  e->children = {std::move(body)};
  return e;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Atom:
    case ExprKind::Opaque:
      return a->text == b->text;
    case ExprKind::Connective:
      if (a->conn != b->conn) return false;
      break;
    case ExprKind::Relation:
      if (a->rel != b->rel) return false;
      break;
    case ExprKind::Quantifier:
      if (a->quant != b->quant || !binder_equal(a->qbinder, b->qbinder)) return false;
      break;
    default:
      break;
  }
  if (a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!expr_equal(a->children[i], b->children[i])) return false;
  return true;
}

bool binder_equal(const Binder& a, const Binder& b) {
  if (a.kind != b.kind || a.names != b.names) return false;
  if (!a.type && !b.type) return true;
  if (!a.type || !b.type) return false;
  return expr_equal(a.type, b.type);
}

bool file_equal(const StatementFile& a, const StatementFile& b) {
  if (a.preamble != b.preamble || a.decl_keyword != b.decl_keyword || a.decl_name != b.decl_name)
    return false;
  if (a.binders.size() != b.binders.size()) return false;
  for (std::size_t i = 0; i < a.binders.size(); ++i)
    if (!binder_equal(a.binders[i], b.binders[i])) return false;
  return expr_equal(a.goal, b.goal) && a.proof_body == b.proof_body;
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

enum class Tok {
  Ident, Number, Symbol, String,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket, Comma, Colon, Assign,
  OpAnd, OpOr, OpIff, OpArrow, OpEq, OpNe, OpLt, OpLe, OpGt, OpGe,
  KwForall, KwExists, KwNot, KwTheorem, KwLemma,
  End
};

struct Token {
  Tok type = Tok::End;
  std::string text;
  std::size_t pos = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
}

// Skips a "--" line comment or a (nested) "/- -/" block comment; returns the
// index just past it, or `i` when there is no comment at `i`.
std::size_t skip_comment(const std::string& s, std::size_t i) {
  if (i + 1 < s.size() && s[i] == '-' && s[i + 1] == '-') {
    while (i < s.size() && s[i] != '\n') ++i;
    return i;
  }
  if (i + 1 < s.size() && s[i] == '/' && s[i + 1] == '-') {
    int depth = 1;
    i += 2;
    while (i < s.size() && depth > 0) {
      if (i + 1 < s.size() && s[i] == '/' && s[i + 1] == '-') {
        ++depth;
        i += 2;
      } else if (i + 1 < s.size() && s[i] == '-' && s[i + 1] == '/') {
        --depth;
        i += 2;
      } else {
        ++i;
      }
    }
    return i;
  }
  return i;
}

std::size_t skip_string(const std::string& s, std::size_t i) {
  // Caller guarantees s[i] == '"'.
  ++i;
  while (i < s.size()) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      i += 2;
    } else if (s[i] == '"') {
      return i + 1;
    } else {
      ++i;
    }
  }
  return i;
}

struct UnicodeOp {
  const char* utf8;
  std::size_t len;
  Tok tok;
  const char* ascii;
};

const UnicodeOp kUnicodeOps[] = {
    {"\xE2\x88\x80", 3, Tok::KwForall, "forall"},
    {"\xE2\x88\x83", 3, Tok::KwExists, "exists"},
    {"\xE2\x86\x92", 3, Tok::OpArrow, "->"},
    {"\xE2\x88\xA7", 3, Tok::OpAnd, "/\\"},
    {"\xE2\x88\xA8", 3, Tok::OpOr, "\\/"},
    {"\xE2\x86\x94", 3, Tok::OpIff, "<->"},
    {"\xE2\x89\xA0", 3, Tok::OpNe, "!="},
    {"\xE2\x89\xA4", 3, Tok::OpLe, "<="},
    {"\xE2\x89\xA5", 3, Tok::OpGe, ">="},
    {"\xC2\xAC", 2, Tok::KwNot, "Not"},
};

std::vector<Token> tokenize(const std::string& s, std::size_t base_offset) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t after = skip_comment(s, i);
    if (after != i) {
      i = after;
      continue;
    }
    std::size_t pos = base_offset + i;
    if (c == '"') {
      std::size_t end = skip_string(s, i);
      out.push_back({Tok::String, s.substr(i, end - i), pos});
      i = end;
      continue;
    }
    bool matched_unicode = false;
    for (const auto& op : kUnicodeOps) {
      if (s.compare(i, op.len, op.utf8) == 0) {
        out.push_back({op.tok, op.ascii, pos});
        i += op.len;
        matched_unicode = true;
        break;
      }
    }
    if (matched_unicode) continue;
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      std::string word = s.substr(i, j - i);
      Tok t = Tok::Ident;
      if (word == "forall") t = Tok::KwForall;
      else if (word == "exists") t = Tok::KwExists;
      else if (word == "Not" || word == "not") t = Tok::KwNot;
      else if (word == "theorem") t = Tok::KwTheorem;
      else if (word == "lemma") t = Tok::KwLemma;
      if (t == Tok::KwNot) word = "Not";
      out.push_back({t, word, pos});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i + 1;
      while (j < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.'))
        ++j;
      out.push_back({Tok::Number, s.substr(i, j - i), pos});
      i = j;
      continue;
    }
    auto two = s.substr(i, 2);
    auto three = s.substr(i, 3);
    if (three == "<->") { out.push_back({Tok::OpIff, "<->", pos}); i += 3; continue; }
    if (two == ":=") { out.push_back({Tok::Assign, ":=", pos}); i += 2; continue; }
    if (two == "->") { out.push_back({Tok::OpArrow, "->", pos}); i += 2; continue; }
    if (two == "/\\") { out.push_back({Tok::OpAnd, "/\\", pos}); i += 2; continue; }
    if (two == "\\/") { out.push_back({Tok::OpOr, "\\/", pos}); i += 2; continue; }
    if (two == "!=") { out.push_back({Tok::OpNe, "!=", pos}); i += 2; continue; }
    if (two == "<=") { out.push_back({Tok::OpLe, "<=", pos}); i += 2; continue; }
    if (two == ">=") { out.push_back({Tok::OpGe, ">=", pos}); i += 2; continue; }
    switch (c) {
      case '(': out.push_back({Tok::LParen, "(", pos}); break;
      case ')': out.push_back({Tok::RParen, ")", pos}); break;
      case '{': out.push_back({Tok::LBrace, "{", pos}); break;
      case '}': out.push_back({Tok::RBrace, "}", pos}); break;
      case '[': out.push_back({Tok::LBracket, "[", pos}); break;
      case ']': out.push_back({Tok::RBracket, "]", pos}); break;
      case ',': out.push_back({Tok::Comma, ",", pos}); break;
      case ':': out.push_back({Tok::Colon, ":", pos}); break;
      case '=': out.push_back({Tok::OpEq, "=", pos}); break;
      case '<': out.push_back({Tok::OpLt, "<", pos}); break;
      case '>': out.push_back({Tok::OpGt, ">", pos}); break;
      default: {
        // Any other byte run (arithmetic operators, unknown unicode, ...)
        // becomes a one-symbol token preserved in opaque leaves.
        std::size_t j = i + 1;
        if (static_cast<unsigned char>(c) >= 0x80) {
          while (j < s.size() && (static_cast<unsigned char>(s[j]) & 0xC0) == 0x80) ++j;
        }
        out.push_back({Tok::Symbol, s.substr(i, j - i), pos});
        i = j;
        continue;
      }
    }
    ++i;
  }
  out.push_back({Tok::End, "", base_offset + s.size()});
  return out;
}

bool is_relation(Tok t) {
  return t == Tok::OpEq || t == Tok::OpNe || t == Tok::OpLt || t == Tok::OpLe ||
         t == Tok::OpGt || t == Tok::OpGe;
}

RelKind rel_of(Tok t) {
  switch (t) {
    case Tok::OpEq: return RelKind::Eq;
    case Tok::OpNe: return RelKind::Ne;
    case Tok::OpLt: return RelKind::Lt;
    case Tok::OpLe: return RelKind::Le;
    case Tok::OpGt: return RelKind::Gt;
    default: return RelKind::Ge;
  }
}

int binop_prec(Tok t) {
  switch (t) {
    case Tok::OpIff: return 10;
    case Tok::OpArrow: return 20;
    case Tok::OpOr: return 30;
    case Tok::OpAnd: return 40;
    default: return -1;
  }
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek() const { return toks_[idx_]; }
  const Token& get() { return toks_[idx_++]; }
  bool at(Tok t) const { return peek().type == t; }

  void expect(Tok t, const char* what) {
    if (!at(t)) throw ParseError(peek().pos, what);
    ++idx_;
  }

  ExprPtr parse_expr(int min_prec) {
    if (at(Tok::KwForall) || at(Tok::KwExists)) return parse_quantifier();
    ExprPtr lhs = parse_unary();
    for (;;) {
      Tok t = peek().type;
      int prec = binop_prec(t);
      if (prec < 0 || prec < min_prec) break;
      get();
      ExprPtr rhs = parse_expr(prec);  // right-associative
      switch (t) {
        case Tok::OpAnd: lhs = Expr::connective(ConnKind::And, {lhs, rhs}); break;
        case Tok::OpOr: lhs = Expr::connective(ConnKind::Or, {lhs, rhs}); break;
        case Tok::OpIff: lhs = Expr::connective(ConnKind::Iff, {lhs, rhs}); break;
        default: lhs = Expr::arrow(lhs, rhs); break;
      }
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (at(Tok::KwNot)) {
      get();
      if (at(Tok::KwForall) || at(Tok::KwExists))
        return Expr::connective(ConnKind::Not, {parse_quantifier()});
      return Expr::connective(ConnKind::Not, {parse_unary()});
    }
    return parse_cmp();
  }

  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_term();
    if (is_relation(peek().type)) {
      Tok t = get().type;
      ExprPtr rhs = parse_term();
      if (is_relation(peek().type)) throw ParseError(peek().pos, "single relation (chains unsupported)");
      return Expr::relation(rel_of(t), lhs, rhs);
    }
    return lhs;
  }

  ExprPtr parse_term() {
    std::vector<ExprPtr> items;
    for (;;) {
      switch (peek().type) {
        case Tok::Ident:
          items.push_back(Expr::atom(get().text));
          break;
        case Tok::Number:
        case Tok::Symbol:
        case Tok::String:
          items.push_back(Expr::opaque(get().text));
          break;
        case Tok::LParen:
          items.push_back(parse_paren());
          break;
        default:
          goto done;
      }
    }
  done:
    if (items.empty()) throw ParseError(peek().pos, "expression");
    if (items.size() == 1) return items[0];
    return Expr::application(std::move(items));
  }

  ExprPtr parse_paren() {
    std::size_t open_idx = idx_;
    expect(Tok::LParen, "'('");
    ExprPtr inner;
    bool structured = true;
    try {
      inner = parse_expr(0);
    } catch (const ParseError&) {
      structured = false;
    }
    if (structured && at(Tok::RParen)) {
      get();
      return Expr::paren(inner);
    }
    // Content the grammar cannot shape (tuples, anonymous constructors, ...)
    // survives as one opaque leaf spanning the balanced region.
    idx_ = open_idx + 1;
    std::string raw;
    int depth = 1;
    while (!at(Tok::End)) {
      Tok t = peek().type;
      if (t == Tok::LParen) ++depth;
      if (t == Tok::RParen) {
        --depth;
        if (depth == 0) break;
      }
      if (!raw.empty()) raw += ' ';
      raw += get().text;
    }
    expect(Tok::RParen, "')'");
    return Expr::paren(Expr::opaque(raw));
  }

  ExprPtr parse_quantifier() {
    QuantKind q = get().type == Tok::KwForall ? QuantKind::Forall : QuantKind::Exists;
    std::vector<Binder> groups;
    std::vector<std::string> pending;
    for (;;) {
      if (at(Tok::Ident)) {
        pending.push_back(get().text);
        continue;
      }
      if (at(Tok::Colon) && !pending.empty()) {
        get();
        ExprPtr type = parse_expr(0);
        groups.push_back({BinderKind::Explicit, pending, type});
        pending.clear();
        break;
      }
      if (at(Tok::LParen)) {
        if (!pending.empty()) {
          groups.push_back({BinderKind::Explicit, pending, nullptr});
          pending.clear();
        }
        get();
        std::vector<std::string> names;
        while (at(Tok::Ident)) names.push_back(get().text);
        if (names.empty()) throw ParseError(peek().pos, "binder name");
        expect(Tok::Colon, "':' in quantifier binder");
        ExprPtr type = parse_expr(0);
        expect(Tok::RParen, "')'");
        groups.push_back({BinderKind::Explicit, names, type});
        continue;
      }
      if (at(Tok::Comma)) {
        if (!pending.empty()) {
          groups.push_back({BinderKind::Explicit, pending, nullptr});
          pending.clear();
        }
        break;
      }
      throw ParseError(peek().pos, "quantifier binder");
    }
    if (groups.empty()) throw ParseError(peek().pos, "quantifier binder");
    expect(Tok::Comma, "',' after quantifier binder");
    ExprPtr body = parse_expr(0);
    for (auto it = groups.rbegin(); it != groups.rend(); ++it)
      body = Expr::quantifier(q, *it, body);
    return body;
  }

  Binder parse_binder_group() {
    Tok open = get().type;
    BinderKind kind = open == Tok::LParen ? BinderKind::Explicit
                      : open == Tok::LBrace ? BinderKind::Implicit
                                            : BinderKind::Instance;
    Tok closer = open == Tok::LParen ? Tok::RParen
                 : open == Tok::LBrace ? Tok::RBrace
                                       : Tok::RBracket;
    std::size_t start_idx = idx_;
    std::vector<std::string> names;
    while (at(Tok::Ident)) names.push_back(get().text);
    if (at(Tok::Colon) && !names.empty()) {
      get();
      ExprPtr type = parse_expr(0);
      expect(closer, "binder group closer");
      return {kind, names, type};
    }
    if (kind == BinderKind::Instance) {
      // Anonymous instance binder like [Group G]: the whole content is a type.
      idx_ = start_idx;
      ExprPtr type = parse_expr(0);
      expect(closer, "']'");
      return {kind, {}, type};
    }
    throw ParseError(peek().pos, "':' in binder group");
  }

  StatementFile parse_declaration() {
    StatementFile f;
    if (at(Tok::KwTheorem) || at(Tok::KwLemma)) {
      f.decl_keyword = get().text;
    } else {
      throw ParseError(peek().pos, "'theorem' or 'lemma'");
    }
    if (!at(Tok::Ident)) throw ParseError(peek().pos, "declaration name");
    f.decl_name = get().text;
    while (at(Tok::LParen) || at(Tok::LBrace) || at(Tok::LBracket))
      f.binders.push_back(parse_binder_group());
    expect(Tok::Colon, "':' before goal");
    f.goal = parse_expr(0);
    expect(Tok::End, "':=' after goal");
    return f;
  }

 private:
  std::vector<Token> toks_;
  std::size_t idx_ = 0;
};

// Comment/string-aware scan over word tokens (used for declaration counting
// and proof-output classification).
template <typename Fn>
void scan_words(const std::string& s, Fn&& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t after = skip_comment(s, i);
    if (after != i) {
      i = after;
      continue;
    }
    if (s[i] == '"') {
      i = skip_string(s, i);
      continue;
    }
    if (ident_start(s[i])) {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      fn(std::string_view(s).substr(i, j - i), i);
      i = j;
      continue;
    }
    ++i;
  }
}

std::string collapse_ws(const std::string& s) {
  std::string out;
  bool in_space = true;  // trims leading whitespace
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out += ' ';
      in_space = true;
    } else {
      out += c;
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Offset of the first top-level ":=" in `s`, comment/string aware, or npos.
std::size_t find_assign(const std::string& s) {
  std::size_t i = 0;
  int depth = 0;
  while (i < s.size()) {
    std::size_t after = skip_comment(s, i);
    if (after != i) {
      i = after;
      continue;
    }
    char c = s[i];
    if (c == '"') {
      i = skip_string(s, i);
      continue;
    }
    if (c == '(' || c == '{' || c == '[') ++depth;
    if (c == ')' || c == '}' || c == ']') --depth;
    if (depth == 0 && c == ':' && i + 1 < s.size() && s[i + 1] == '=') return i;
    ++i;
  }
  return std::string::npos;
}

}  // namespace

// ---------------------------------------------------------------------------
// Printing

namespace {

void print_expr_rec(const ExprPtr& e, std::string& out) {
  switch (e->kind) {
    case ExprKind::Atom:
    case ExprKind::Opaque:
      out += e->text;
      break;
    case ExprKind::Application:
      for (std::size_t i = 0; i < e->children.size(); ++i) {
        if (i) out += ' ';
        print_expr_rec(e->children[i], out);
      }
      break;
    case ExprKind::Paren:
      out += '(';
      print_expr_rec(e->children[0], out);
      out += ')';
      break;
    case ExprKind::Arrow:
      print_expr_rec(e->children[0], out);
      out += " -> ";
      print_expr_rec(e->children[1], out);
      break;
    case ExprKind::Relation: {
      static const char* ops[] = {"=", "!=", "<", "<=", ">", ">="};
      print_expr_rec(e->children[0], out);
      out += ' ';
      out += ops[static_cast<int>(e->rel)];
      out += ' ';
      print_expr_rec(e->children[1], out);
      break;
    }
    case ExprKind::Connective:
      if (e->conn == ConnKind::Not) {
        out += "Not ";
        print_expr_rec(e->children[0], out);
      } else {
        const char* op = e->conn == ConnKind::And ? " /\\ "
                         : e->conn == ConnKind::Or ? " \\/ "
                                                   : " <-> ";
        print_expr_rec(e->children[0], out);
        out += op;
        print_expr_rec(e->children[1], out);
      }
      break;
    case ExprKind::Quantifier: {
      out += e->quant == QuantKind::Forall ? "forall " : "exists ";
      for (std::size_t i = 0; i < e->qbinder.names.size(); ++i) {
        if (i) out += ' ';
        out += e->qbinder.names[i];
      }
      if (e->qbinder.type) {
        out += " : ";
        print_expr_rec(e->qbinder.type, out);
      }
      out += ", ";
      print_expr_rec(e->children[0], out);
      break;
    }
  }
}

}  // namespace

std::string print_expr(const ExprPtr& e) {
  std::string out;
  print_expr_rec(e, out);
  return out;
}

std::string print_binder(const Binder& b) {
  const char* open = b.kind == BinderKind::Explicit ? "(" : b.kind == BinderKind::Implicit ? "{" : "[";
  const char* close = b.kind == BinderKind::Explicit ? ")" : b.kind == BinderKind::Implicit ? "}" : "]";
  std::string out = open;
  for (std::size_t i = 0; i < b.names.size(); ++i) {
    if (i) out += ' ';
    out += b.names[i];
  }
  if (!b.names.empty()) out += " : ";
  if (b.type) out += print_expr(b.type);
  out += close;
  return out;
}

std::string print_file(const StatementFile& f) {
  std::string out;
  for (const auto& line : f.preamble) {
    out += line;
    out += '\n';
  }
  out += f.decl_keyword;
  out += ' ';
  out += f.decl_name;
  for (const auto& b : f.binders) {
    out += ' ';
    out += print_binder(b);
  }
  out += " : ";
  out += print_expr(f.goal);
  out += " := ";
  out += f.proof_body;
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Parsing entry point

StatementFile parse_file(const std::string& raw_text) {
  if (raw_text.empty()) throw ParseError(0, "non-empty statement file");
  std::string text;
  text.reserve(raw_text.size());
  for (std::size_t i = 0; i < raw_text.size(); ++i) {
    if (raw_text[i] == '\r' && i + 1 < raw_text.size() && raw_text[i + 1] == '\n') continue;
    text += raw_text[i];
  }

  std::size_t decl_count = 0;
  std::size_t first_decl = std::string::npos;
  scan_words(text, [&](std::string_view w, std::size_t pos) {
    if (w == "theorem" || w == "lemma") {
      ++decl_count;
      if (first_decl == std::string::npos) first_decl = pos;
    }
  });
  if (decl_count == 0) throw NoDeclaration();
  if (decl_count > 1) throw MultipleDeclarations();

  StatementFile f;
  std::string head_prefix = text.substr(0, first_decl);
  std::size_t line_start = 0;
  for (std::size_t i = 0; i <= head_prefix.size(); ++i) {
    if (i == head_prefix.size() || head_prefix[i] == '\n') {
      std::string line = head_prefix.substr(line_start, i - line_start);
      while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
      if (!trim(line).empty()) f.preamble.push_back(line);
      line_start = i + 1;
    }
  }

  std::string decl_region = text.substr(first_decl);
  std::size_t assign = find_assign(decl_region);
  if (assign == std::string::npos)
    throw ParseError(first_decl + decl_region.size(), "':=' introducing the proof body");
  std::string head = decl_region.substr(0, assign);
  std::string body = trim(decl_region.substr(assign + 2));
  if (body.empty()) throw ParseError(first_decl + assign + 2, "proof body");

  Parser p(tokenize(head, first_decl));
  StatementFile parsed = p.parse_declaration();
  parsed.preamble = std::move(f.preamble);
  parsed.proof_body = std::move(body);
  return parsed;
}

// ---------------------------------------------------------------------------
// Canonicalization

namespace {

class Renamer {
 public:
  std::string fresh(const std::string& name) {
    std::string v = "v" + std::to_string(counter_++);
    scopes_.back().push_back({name, v});
    return v;
  }

  void push_scope() { scopes_.push_back({}); }
  void pop_scope() { scopes_.pop_back(); }

  const std::string* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
      for (auto jt = it->rbegin(); jt != it->rend(); ++jt)
        if (jt->first == name) return &jt->second;
    return nullptr;
  }

  Renamer() { scopes_.push_back({}); }

 private:
  int counter_ = 0;
  std::vector<std::vector<std::pair<std::string, std::string>>> scopes_;
};

ExprPtr rename_expr(const ExprPtr& e, Renamer& r) {
  switch (e->kind) {
    case ExprKind::Atom: {
      const std::string* v = r.lookup(e->text);
      return v ? Expr::atom(*v) : e;
    }
    case ExprKind::Opaque:
      return e;
    case ExprKind::Quantifier: {
      Binder b = e->qbinder;
      if (b.type) b.type = rename_expr(b.type, r);
      r.push_scope();
      for (auto& n : b.names) n = r.fresh(n);
      ExprPtr body = rename_expr(e->children[0], r);
      r.pop_scope();
      return Expr::quantifier(e->quant, std::move(b), std::move(body));
    }
    default: {
      auto copy = std::make_shared<Expr>(*e);
      for (auto& c : copy->children) c = rename_expr(c, r);
      return copy;
    }
  }
}

}  // namespace

CanonicalKey canonicalize(const StatementFile& f) {
  std::string out;
  for (const auto& line : f.preamble) {
    out += collapse_ws(line);
    out += '\n';
  }
  StatementFile canon;
  canon.decl_keyword = f.decl_keyword;
  canon.decl_name = "thm";
  Renamer r;
  for (const auto& b : f.binders) {
    Binder nb = b;
    if (nb.type) nb.type = rename_expr(nb.type, r);
    for (auto& n : nb.names) n = r.fresh(n);
    canon.binders.push_back(std::move(nb));
  }
  canon.goal = rename_expr(f.goal, r);
  canon.proof_body = collapse_ws(f.proof_body);
  out += print_file(canon);
  return CanonicalKey{out};
}

std::string CanonicalKey::digest() const { return hex64(fnv1a64(key)); }

// ---------------------------------------------------------------------------
// Proof-output classification

ProofClassification classify_proof_output(const std::string& text) {
  ProofClassification c;
  scan_words(text, [&](std::string_view w, std::size_t) {
    if (w == "sorry") ++c.sorry_count;
    if (w == "theorem" || w == "lemma") c.has_theorem = true;
  });
  c.complete = c.sorry_count == 0;
  c.theorem_complete = c.complete && c.has_theorem;
  return c;
}

// ---------------------------------------------------------------------------
// Identifier queries

bool expr_mentions_name(const ExprPtr& e, const std::string& name) {
  if (!e) return false;
  if (e->kind == ExprKind::Atom && e->text == name) return true;
  if (e->kind == ExprKind::Quantifier) {
    for (const auto& n : e->qbinder.names)
      if (n == name) return true;  // conservative: the binding occurrence counts
    if (e->qbinder.type && expr_mentions_name(e->qbinder.type, name)) return true;
  }
  for (const auto& c : e->children)
    if (expr_mentions_name(c, name)) return true;
  return false;
}

namespace {

void collect_free(const ExprPtr& e, std::vector<std::string>& bound,
                  std::vector<std::string>& out, std::set<std::string>& seen) {
  if (!e) return;
  if (e->kind == ExprKind::Atom) {
    if (std::find(bound.begin(), bound.end(), e->text) == bound.end() && seen.insert(e->text).second)
      out.push_back(e->text);
    return;
  }
  if (e->kind == ExprKind::Quantifier) {
    if (e->qbinder.type) collect_free(e->qbinder.type, bound, out, seen);
    std::size_t mark = bound.size();
    for (const auto& n : e->qbinder.names) bound.push_back(n);
    collect_free(e->children[0], bound, out, seen);
    bound.resize(mark);
    return;
  }
  for (const auto& c : e->children) collect_free(c, bound, out, seen);
}

}  // namespace

std::vector<std::string> free_identifiers(const StatementFile& f) {
  std::vector<std::string> bound;
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& b : f.binders) {
    if (b.type) collect_free(b.type, bound, out, seen);
    for (const auto& n : b.names) bound.push_back(n);
  }
  collect_free(f.goal, bound, out, seen);
  return out;
}

std::vector<std::string> bound_names(const StatementFile& f) {
  std::vector<std::string> out;
  for (const auto& b : f.binders)
    for (const auto& n : b.names) out.push_back(n);
  struct Walker {
    std::vector<std::string>* out;
    void walk(const ExprPtr& e) {
      if (!e) return;
      if (e->kind == ExprKind::Quantifier)
        for (const auto& n : e->qbinder.names) out->push_back(n);
      if (e->kind == ExprKind::Quantifier && e->qbinder.type) walk(e->qbinder.type);
      for (const auto& c : e->children) walk(c);
    }
  } w{&out};
  w.walk(f.goal);
  return out;
}

}  // namespace evostmt
