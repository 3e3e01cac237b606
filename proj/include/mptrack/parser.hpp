#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mptrack/rational.hpp"
#include "mptrack/slp.hpp"

namespace mptrack {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                           ": " + what),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_, col_;
};

/// Everything a system file can declare. `target` is over the base variables;
/// `start` and `patches` are over the extended list (base + homogenizing
/// variables) when groups are declared.
struct SystemFile {
  std::vector<std::string> base_variables;
  SlpSystem target;
  std::optional<SlpSystem> start;
  std::vector<VariableGroup> groups;
  std::optional<SlpSystem> patches;
  std::optional<ComplexRational> gamma;
};

namespace detail {

enum class TokKind { Ident, Number, Punct, End };

struct Token {
  TokKind kind;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_;
        ++pos_;
      } else {
        break;
      }
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = {TokKind::End, "", line_, col_};
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      tok_ = {TokKind::Ident, src_.substr(start, pos_ - start), line_, col_};
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t mark = pos_;
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
          }
        } else {
          pos_ = mark;  // 'e' belongs to the next token
        }
      }
      tok_ = {TokKind::Number, src_.substr(start, pos_ - start), line_, col_};
    } else {
      tok_ = {TokKind::Punct, std::string(1, c), line_, col_};
      ++pos_;
    }
    col_ += static_cast<int>(tok_.text.size());
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

// expression AST (per statement, emitted after all declarations are known)
struct ExprNode;
using ExprPtr = std::unique_ptr<ExprNode>;

struct ExprNode {
  enum class Kind { Number, Imag, Ident, Neg, Add, Sub, Mul, Div, Pow } kind;
  std::string text;  // literal or identifier
  long exponent = 0;
  ExprPtr lhs, rhs;
  int line = 1, col = 1;
};

class ExprParser {
 public:
  explicit ExprParser(Lexer& lex) : lex_(lex) {}

  ExprPtr parse() { return parse_sum(); }

 private:
  ExprPtr parse_sum() {
    ExprPtr e = parse_term();
    while (is_punct("+") || is_punct("-")) {
      Token op = lex_.next();
      ExprPtr rhs = parse_term();
      e = make(op.text == "+" ? ExprNode::Kind::Add : ExprNode::Kind::Sub, op, std::move(e),
               std::move(rhs));
    }
    return e;
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    while (is_punct("*") || is_punct("/")) {
      Token op = lex_.next();
      ExprPtr rhs = parse_factor();
      e = make(op.text == "*" ? ExprNode::Kind::Mul : ExprNode::Kind::Div, op, std::move(e),
               std::move(rhs));
    }
    return e;
  }

  ExprPtr parse_factor() {
    if (is_punct("-") || is_punct("+")) {
      Token op = lex_.next();
      ExprPtr inner = parse_factor();
      if (op.text == "+") return inner;
      return make(ExprNode::Kind::Neg, op, std::move(inner), nullptr);
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (!is_punct("^")) return base;
    Token caret = lex_.next();
    bool negated = false;
    if (is_punct("-")) {
      lex_.next();
      negated = true;
    }
    Token e = lex_.next();
    if (e.kind != TokKind::Number || e.text.find('.') != std::string::npos ||
        e.text.find('e') != std::string::npos || e.text.find('E') != std::string::npos) {
      throw ParseError(e.line, e.col, "non-integer exponent");
    }
    long k = std::stol(e.text);
    if (negated || k <= 0) throw ParseError(e.line, e.col, "exponent must be a positive integer");
    ExprPtr node = make(ExprNode::Kind::Pow, caret, std::move(base), nullptr);
    node->exponent = k;
    return node;
  }

  ExprPtr parse_primary() {
    const Token& t = lex_.peek();
    if (t.kind == TokKind::Number) {
      Token n = lex_.next();
      ExprPtr e = make(ExprNode::Kind::Number, n, nullptr, nullptr);
      e->text = n.text;
      return e;
    }
    if (t.kind == TokKind::Ident) {
      Token n = lex_.next();
      ExprPtr e = make(n.text == "I" ? ExprNode::Kind::Imag : ExprNode::Kind::Ident, n, nullptr,
                       nullptr);
      e->text = n.text;
      return e;
    }
    if (t.kind == TokKind::Punct && t.text == "(") {
      lex_.next();
      ExprPtr e = parse_sum();
      expect_punct(")");
      return e;
    }
    throw ParseError(t.line, t.col, "syntax error: expected an expression");
  }

  bool is_punct(const char* p) const {
    return lex_.peek().kind == TokKind::Punct && lex_.peek().text == p;
  }

  void expect_punct(const char* p) {
    const Token& t = lex_.peek();
    if (!is_punct(p)) {
      throw ParseError(t.line, t.col, std::string("syntax error: expected '") + p + "'");
    }
    lex_.next();
  }

  static ExprPtr make(ExprNode::Kind k, const Token& at, ExprPtr a, ExprPtr b) {
    auto e = std::make_unique<ExprNode>();
    e->kind = k;
    e->line = at.line;
    e->col = at.col;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
  }

  Lexer& lex_;
};

/// Emits an AST into one or more builders (a `define` must be usable from the
/// target, start, and patch sections alike, so defines emit everywhere).
/// Constant subexpressions fold exactly and only materialize where referenced.
class MultiEmitter {
 public:
  struct Node {
    bool is_const = false;
    ComplexRational c;
    std::vector<std::uint32_t> slots;  // parallel to builders; valid where mask bit set
    std::uint32_t mask = 0;
  };

  MultiEmitter(std::vector<SlpBuilder*> builders,
               std::vector<const std::map<std::string, std::uint32_t>*> var_maps)
      : builders_(std::move(builders)), var_maps_(std::move(var_maps)) {}

  std::map<std::string, Node>& definitions() { return defs_; }

  std::uint32_t all_mask() const { return (1u << builders_.size()) - 1; }

  Node emit(const ExprNode& e, std::uint32_t mask) {
    switch (e.kind) {
      case ExprNode::Kind::Number:
        return constant(ComplexRational(rational_from_literal(e.text)));
      case ExprNode::Kind::Imag:
        return constant(ComplexRational(0, 1));
      case ExprNode::Kind::Ident: {
        if (e.text == "t") {
          throw ParseError(e.line, e.col, "'t' is reserved for the homotopy parameter");
        }
        auto def = defs_.find(e.text);
        if (def != defs_.end()) {
          if (!def->second.is_const && (def->second.mask & mask) != mask) {
            throw ParseError(e.line, e.col, "define '" + e.text + "' not visible here");
          }
          return def->second;
        }
        Node n;
        n.is_const = false;
        n.mask = mask;
        n.slots.assign(builders_.size(), 0);
        for (std::size_t b = 0; b < builders_.size(); ++b) {
          if ((mask & (1u << b)) == 0) continue;
          auto it = var_maps_[b]->find(e.text);
          if (it == var_maps_[b]->end()) {
            throw ParseError(e.line, e.col, "undeclared variable '" + e.text + "'");
          }
          n.slots[b] = builders_[b]->variable(it->second);
        }
        return n;
      }
      case ExprNode::Kind::Neg: {
        Node a = emit(*e.lhs, mask);
        if (a.is_const) return constant(-a.c);
        return apply(mask, [&](SlpBuilder& bld, std::size_t i) { return bld.neg(a.slots[i]); });
      }
      case ExprNode::Kind::Add:
      case ExprNode::Kind::Sub:
      case ExprNode::Kind::Mul: {
        Node a = emit(*e.lhs, mask);
        Node b = emit(*e.rhs, mask);
        if (a.is_const && b.is_const) {
          if (e.kind == ExprNode::Kind::Add) return constant(a.c + b.c);
          if (e.kind == ExprNode::Kind::Sub) return constant(a.c - b.c);
          return constant(a.c * b.c);
        }
        materialize(a, mask);
        materialize(b, mask);
        return apply(mask, [&](SlpBuilder& bld, std::size_t i) {
          if (e.kind == ExprNode::Kind::Add) return bld.add(a.slots[i], b.slots[i]);
          if (e.kind == ExprNode::Kind::Sub) return bld.sub(a.slots[i], b.slots[i]);
          return bld.mul(a.slots[i], b.slots[i]);
        });
      }
      case ExprNode::Kind::Div: {
        Node a = emit(*e.lhs, mask);
        Node b = emit(*e.rhs, mask);
        if (!b.is_const) {
          throw ParseError(e.line, e.col, "division by a non-constant expression");
        }
        if (b.c.is_zero()) throw ParseError(e.line, e.col, "division by zero");
        if (a.is_const) return constant(a.c / b.c);
        Node c = constant(ComplexRational(1, 0) / b.c);
        materialize(c, mask);
        return apply(mask,
                     [&](SlpBuilder& bld, std::size_t i) { return bld.mul(a.slots[i], c.slots[i]); });
      }
      case ExprNode::Kind::Pow: {
        Node a = emit(*e.lhs, mask);
        long k = e.exponent;
        if (a.is_const) {
          if (k > 4096) throw ParseError(e.line, e.col, "constant exponent too large");
          ComplexRational r(1, 0);
          ComplexRational base = a.c;
          long kk = k;
          while (kk > 0) {
            if (kk & 1) r = r * base;
            kk >>= 1;
            if (kk > 0) base = base * base;
          }
          return constant(r);
        }
        return apply(mask, [&](SlpBuilder& bld, std::size_t i) { return bld.pow(a.slots[i], k); });
      }
    }
    throw std::logic_error("unreachable expression kind");
  }

  /// Slot of the expression in builder `b`, materializing constants on demand.
  std::uint32_t slot_in(Node& n, std::size_t b) {
    materialize(n, 1u << b);
    return n.slots[b];
  }

 private:
  Node constant(ComplexRational c) {
    Node n;
    n.is_const = true;
    n.c = std::move(c);
    return n;
  }

  void materialize(Node& n, std::uint32_t mask) {
    if (!n.is_const) return;
    if (n.slots.empty()) n.slots.assign(builders_.size(), 0);
    for (std::size_t b = 0; b < builders_.size(); ++b) {
      if ((mask & (1u << b)) != 0 && (n.mask & (1u << b)) == 0) {
        n.slots[b] = builders_[b]->constant(n.c);
        n.mask |= 1u << b;
      }
    }
  }

  template <typename F>
  Node apply(std::uint32_t mask, F f) {
    Node n;
    n.is_const = false;
    n.mask = mask;
    n.slots.assign(builders_.size(), 0);
    for (std::size_t i = 0; i < builders_.size(); ++i) {
      if ((mask & (1u << i)) != 0) n.slots[i] = f(*builders_[i], i);
    }
    return n;
  }

  std::vector<SlpBuilder*> builders_;
  std::vector<const std::map<std::string, std::uint32_t>*> var_maps_;
  std::map<std::string, Node> defs_;
};

}  // namespace detail

/// Parse the system file grammar: `variables ...;`, `group H: ...;`,
/// `patch <expr>;`, `define name = <expr>;`, `function <expr>;`,
/// `start_function <expr>;`, `gamma <re> <im>;`, with `#` comments.
inline SystemFile parse_system_file(const std::string& text) {
  using detail::ExprNode;
  using detail::ExprPtr;
  using detail::Lexer;
  using detail::TokKind;
  using detail::Token;

  Lexer lex(text);

  struct Stmt {
    enum class Kind { Define, Function, StartFunction, Patch } kind;
    std::string name;  // define target
    ExprPtr expr;
  };

  std::vector<std::string> base_vars;
  std::vector<std::pair<std::string, std::vector<std::string>>> group_decls;
  std::vector<Stmt> stmts;
  std::optional<ComplexRational> gamma;

  auto expect_semicolon = [&]() {
    const Token& t = lex.peek();
    if (t.kind != TokKind::Punct || t.text != ";") {
      throw ParseError(t.line, t.col, "syntax error: expected ';'");
    }
    lex.next();
  };

  // signed literal (integer, ratio, or decimal); no expression grammar, so a
  // leading minus on the second gamma component is not read as subtraction
  auto parse_signed_literal = [&](const char* what) -> mpq_class {
    bool neg = false;
    while (lex.peek().kind == TokKind::Punct &&
           (lex.peek().text == "-" || lex.peek().text == "+")) {
      neg ^= lex.next().text == "-";
    }
    Token num = lex.next();
    if (num.kind != TokKind::Number) {
      throw ParseError(num.line, num.col, std::string("expected a numeric ") + what);
    }
    mpq_class q = rational_from_literal(num.text);
    if (lex.peek().kind == TokKind::Punct && lex.peek().text == "/") {
      lex.next();
      Token den = lex.next();
      if (den.kind != TokKind::Number) {
        throw ParseError(den.line, den.col, "expected a denominator");
      }
      mpq_class d = rational_from_literal(den.text);
      if (d == 0) throw ParseError(den.line, den.col, "zero denominator");
      q /= d;
    }
    if (neg) q = -q;
    return q;
  };

  while (lex.peek().kind != TokKind::End) {
    Token head = lex.next();
    if (head.kind != TokKind::Ident) {
      throw ParseError(head.line, head.col, "syntax error: expected a statement");
    }
    if (head.text == "variables") {
      if (!base_vars.empty()) {
        throw ParseError(head.line, head.col, "duplicate variables declaration");
      }
      while (true) {
        Token v = lex.next();
        if (v.kind != TokKind::Ident) {
          throw ParseError(v.line, v.col, "syntax error: expected a variable name");
        }
        if (v.text == "t" || v.text == "I") {
          throw ParseError(v.line, v.col, "'" + v.text + "' is a reserved name");
        }
        base_vars.push_back(v.text);
        const Token& sep = lex.peek();
        if (sep.kind == TokKind::Punct && sep.text == ",") {
          lex.next();
          continue;
        }
        break;
      }
      expect_semicolon();
    } else if (head.text == "group") {
      Token name = lex.next();
      if (name.kind != TokKind::Ident) {
        throw ParseError(name.line, name.col, "syntax error: expected a group variable name");
      }
      const Token& colon = lex.peek();
      if (colon.kind != TokKind::Punct || colon.text != ":") {
        throw ParseError(colon.line, colon.col, "syntax error: expected ':'");
      }
      lex.next();
      std::vector<std::string> members;
      while (true) {
        Token v = lex.next();
        if (v.kind != TokKind::Ident) {
          throw ParseError(v.line, v.col, "syntax error: expected a variable name");
        }
        members.push_back(v.text);
        const Token& sep = lex.peek();
        if (sep.kind == TokKind::Punct && sep.text == ",") {
          lex.next();
          continue;
        }
        break;
      }
      group_decls.emplace_back(name.text, std::move(members));
      expect_semicolon();
    } else if (head.text == "gamma") {
      mpq_class re = parse_signed_literal("gamma component");
      mpq_class im = parse_signed_literal("gamma component");
      gamma = ComplexRational(re, im);
      if (lex.peek().kind == TokKind::Punct && lex.peek().text == ";") lex.next();
    } else if (head.text == "define") {
      Token name = lex.next();
      if (name.kind != TokKind::Ident) {
        throw ParseError(name.line, name.col, "syntax error: expected a name after define");
      }
      const Token& eq = lex.peek();
      if (eq.kind != TokKind::Punct || eq.text != "=") {
        throw ParseError(eq.line, eq.col, "syntax error: expected '='");
      }
      lex.next();
      detail::ExprParser ep(lex);
      Stmt s{Stmt::Kind::Define, name.text, ep.parse()};
      stmts.push_back(std::move(s));
      expect_semicolon();
    } else if (head.text == "function" || head.text == "start_function" ||
               head.text == "patch") {
      detail::ExprParser ep(lex);
      Stmt::Kind k = head.text == "function"
                         ? Stmt::Kind::Function
                         : (head.text == "start_function" ? Stmt::Kind::StartFunction
                                                          : Stmt::Kind::Patch);
      stmts.push_back({k, "", ep.parse()});
      expect_semicolon();
    } else {
      throw ParseError(head.line, head.col, "unknown statement '" + head.text + "'");
    }
  }

  if (base_vars.empty()) throw ParseError(1, 1, "missing variables declaration");

  SystemFile out;
  out.base_variables = base_vars;
  out.gamma = gamma;

  // resolve groups
  std::map<std::string, std::uint32_t> base_index;
  for (std::size_t i = 0; i < base_vars.size(); ++i) {
    if (!base_index.emplace(base_vars[i], static_cast<std::uint32_t>(i)).second) {
      throw ParseError(1, 1, "duplicate variable '" + base_vars[i] + "'");
    }
  }
  std::vector<std::string> ext_vars = base_vars;
  for (const auto& [hname, members] : group_decls) {
    if (base_index.count(hname) != 0) {
      throw ParseError(1, 1, "group variable '" + hname + "' collides with a variable");
    }
    VariableGroup g;
    g.hom_name = hname;
    for (const std::string& m : members) {
      auto it = base_index.find(m);
      if (it == base_index.end()) {
        throw ParseError(1, 1, "undeclared variable '" + m + "' in group " + hname);
      }
      g.members.push_back(it->second);
    }
    out.groups.push_back(std::move(g));
    ext_vars.push_back(hname);
  }

  std::map<std::string, std::uint32_t> ext_index = base_index;
  for (std::size_t i = base_vars.size(); i < ext_vars.size(); ++i) {
    ext_index.emplace(ext_vars[i], static_cast<std::uint32_t>(i));
  }

  bool has_start = false, has_patch = false;
  for (const Stmt& s : stmts) {
    has_start |= s.kind == Stmt::Kind::StartFunction;
    has_patch |= s.kind == Stmt::Kind::Patch;
  }
  if (has_patch && out.groups.empty()) {
    throw ParseError(1, 1, "patch declared without variable groups");
  }

  const std::vector<std::string>& start_vars = out.groups.empty() ? base_vars : ext_vars;

  SlpBuilder target_bld(base_vars);
  SlpBuilder start_bld(start_vars);
  SlpBuilder patch_bld(ext_vars);

  std::map<std::string, std::uint32_t> start_index =
      out.groups.empty() ? base_index : ext_index;

  std::vector<SlpBuilder*> builders{&target_bld};
  std::vector<const std::map<std::string, std::uint32_t>*> var_maps{&base_index};
  std::size_t start_builder = 0, patch_builder = 0;
  if (has_start) {
    start_builder = builders.size();
    builders.push_back(&start_bld);
    var_maps.push_back(&start_index);
  }
  if (has_patch) {
    patch_builder = builders.size();
    builders.push_back(&patch_bld);
    var_maps.push_back(&ext_index);
  }

  detail::MultiEmitter em(builders, var_maps);
  bool any_function = false;
  for (const Stmt& s : stmts) {
    switch (s.kind) {
      case Stmt::Kind::Define: {
        if (base_index.count(s.name) || ext_index.count(s.name) ||
            em.definitions().count(s.name)) {
          throw ParseError(s.expr->line, s.expr->col, "duplicate name '" + s.name + "'");
        }
        // defines may only reference base variables, so they emit everywhere
        em.definitions().emplace(s.name, em.emit(*s.expr, em.all_mask()));
        break;
      }
      case Stmt::Kind::Function: {
        detail::MultiEmitter::Node n = em.emit(*s.expr, 1u << 0);
        target_bld.output(em.slot_in(n, 0));
        any_function = true;
        break;
      }
      case Stmt::Kind::StartFunction: {
        detail::MultiEmitter::Node n = em.emit(*s.expr, 1u << start_builder);
        start_bld.output(em.slot_in(n, start_builder));
        break;
      }
      case Stmt::Kind::Patch: {
        detail::MultiEmitter::Node n = em.emit(*s.expr, 1u << patch_builder);
        patch_bld.output(em.slot_in(n, patch_builder));
        break;
      }
    }
  }
  if (!any_function) throw ParseError(1, 1, "no function declared");

  out.target = target_bld.finish();
  if (has_start) out.start = start_bld.finish();
  if (has_patch) out.patches = patch_bld.finish();
  return out;
}

/// Convenience: parse a file containing just a target system.
inline SlpSystem parse_system(const std::string& text) {
  return parse_system_file(text).target;
}

}  // namespace mptrack
