#include "qet/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <unordered_map>

#include "qet/errors.hpp"

namespace qet {

namespace {

enum class Tok { Ident, Num, Punct, KetZero, KetPlus, End };

struct Token {
  Tok kind;
  std::string text;
  double num = 0.0;
  bool integral = false;
  std::int64_t inum = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void err(const std::string& msg, int ln, int co) {
    fail(ErrorKind::Syntax, msg, ln, co);
  }

  char peek(std::size_t off = 0) const {
    return pos + off < src.size() ? src[pos + off] : '\0';
  }

  void advance() {
    if (pos < src.size()) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  }

  void skip_ws() {
    for (;;) {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) advance();
      if (peek() == '/' && peek(1) == '/') {
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      break;
    }
  }

  Token next() {
    skip_ws();
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
        id += peek();
        advance();
      }
      t.kind = Tok::Ident;
      t.text = id;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      bool is_int = true;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        num += peek();
        advance();
      }
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        is_int = false;
        num += peek();
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          num += peek();
          advance();
        }
      }
      if ((peek() == 'e' || peek() == 'E') &&
          (std::isdigit(static_cast<unsigned char>(peek(1))) ||
           ((peek(1) == '+' || peek(1) == '-') &&
            std::isdigit(static_cast<unsigned char>(peek(2)))))) {
        is_int = false;
        num += peek();
        advance();
        if (peek() == '+' || peek() == '-') {
          num += peek();
          advance();
        }
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          num += peek();
          advance();
        }
      }
      t.kind = Tok::Num;
      t.text = num;
      t.num = std::strtod(num.c_str(), nullptr);
      t.integral = is_int;
      if (is_int) {
        errno = 0;
        t.inum = std::strtoll(num.c_str(), nullptr, 10);
        if (errno != 0) err("integer literal out of range", t.line, t.col);
      }
      return t;
    }
    if (c == '|') {
      if (peek(1) == '|') {
        advance();
        advance();
        t.kind = Tok::Punct;
        t.text = "||";
        return t;
      }
      if ((peek(1) == '0' || peek(1) == '+') && peek(2) == '>') {
        t.kind = peek(1) == '0' ? Tok::KetZero : Tok::KetPlus;
        advance();
        advance();
        advance();
        return t;
      }
      err("stray '|'", t.line, t.col);
    }
    auto two = [&](const char* s) {
      return peek() == s[0] && peek(1) == s[1];
    };
    const char* twos[] = {"*=", "==", "<=", "&&"};
    for (const char* s : twos) {
      if (two(s)) {
        advance();
        advance();
        t.kind = Tok::Punct;
        t.text = s;
        return t;
      }
    }
    static const std::string singles = "=;,(){}[]+-*!<@";
    if (singles.find(c) != std::string::npos) {
      advance();
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      return t;
    }
    err(std::string("unexpected character '") + c + "'", t.line, t.col);
  }
};

// Parsed expression before its sort (arithmetic vs boolean) is known. A bare
// identifier stays ambiguous until the context or a declaration decides.
struct PExp {
  AExpPtr a;
  BExpPtr b;
  std::string ambig;
  int line = 0, col = 0;
};

struct Parser {
  Lexer lex;
  Token tok;
  std::unordered_map<std::string, Decl::Kind> decl_kinds;

  explicit Parser(const std::string& src) : lex(src) { tok = lex.next(); }

  [[noreturn]] void err(const std::string& msg) { fail(ErrorKind::Syntax, msg, tok.line, tok.col); }
  [[noreturn]] void err_at(const std::string& msg, int ln, int co) {
    fail(ErrorKind::Syntax, msg, ln, co);
  }

  void bump() { tok = lex.next(); }

  bool at_punct(const std::string& p) const { return tok.kind == Tok::Punct && tok.text == p; }
  bool at_ident(const std::string& id) const { return tok.kind == Tok::Ident && tok.text == id; }

  void expect_punct(const std::string& p) {
    if (!at_punct(p)) err("expected '" + p + "'");
    bump();
  }

  std::string expect_ident() {
    if (tok.kind != Tok::Ident) err("expected identifier");
    std::string id = tok.text;
    if (is_keyword(id)) err("keyword '" + id + "' used as identifier");
    if (id.find("__") != std::string::npos)
      err("identifiers containing \"__\" are reserved for synthesized names");
    bump();
    return id;
  }

  static bool is_keyword(const std::string& id) {
    static const char* kw[] = {"skip", "if",   "else", "while",   "true",    "false",
                               "bool", "int",  "qreg", "proc",    "call",    "meas",
                               "measzero",     "consume", "summary"};
    for (const char* k : kw)
      if (id == k) return true;
    return false;
  }

  // --- expressions ---------------------------------------------------------

  AExpPtr to_aexp(PExp& e) {
    if (e.a) return e.a;
    if (!e.ambig.empty()) {
      auto it = decl_kinds.find(e.ambig);
      if (it != decl_kinds.end() && it->second != Decl::Kind::Int)
        err_at("'" + e.ambig + "' is not an int variable", e.line, e.col);
      auto v = make_int_var(e.ambig);
      v->line = e.line;
      v->col = e.col;
      return v;
    }
    err_at("expected an arithmetic expression", e.line, e.col);
  }

  BExpPtr to_bexp(PExp& e) {
    if (e.b) return e.b;
    if (!e.ambig.empty()) {
      auto it = decl_kinds.find(e.ambig);
      if (it != decl_kinds.end() && it->second != Decl::Kind::Bool)
        err_at("'" + e.ambig + "' is not a bool variable", e.line, e.col);
      auto v = make_bool_var(e.ambig);
      v->line = e.line;
      v->col = e.col;
      return v;
    }
    err_at("expected a boolean expression", e.line, e.col);
  }

  PExp parse_expr() { return parse_or(); }

  PExp parse_or() {
    PExp lhs = parse_and();
    while (at_punct("||")) {
      int ln = tok.line, co = tok.col;
      bump();
      PExp rhs = parse_and();
      auto e = make_bbin(BOp::Or, to_bexp(lhs), to_bexp(rhs));
      e->line = ln;
      e->col = co;
      lhs = PExp{nullptr, e, "", ln, co};
    }
    return lhs;
  }

  PExp parse_and() {
    PExp lhs = parse_not();
    while (at_punct("&&")) {
      int ln = tok.line, co = tok.col;
      bump();
      PExp rhs = parse_not();
      auto e = make_bbin(BOp::And, to_bexp(lhs), to_bexp(rhs));
      e->line = ln;
      e->col = co;
      lhs = PExp{nullptr, e, "", ln, co};
    }
    return lhs;
  }

  PExp parse_not() {
    if (at_punct("!")) {
      int ln = tok.line, co = tok.col;
      bump();
      PExp inner = parse_not();
      auto e = make_not(to_bexp(inner));
      e->line = ln;
      e->col = co;
      return PExp{nullptr, e, "", ln, co};
    }
    return parse_cmp();
  }

  PExp parse_cmp() {
    PExp lhs = parse_sum();
    BOp op;
    if (at_punct("==")) op = BOp::Eq;
    else if (at_punct("<=")) op = BOp::Le;
    else if (at_punct("<")) op = BOp::Lt;
    else return lhs;
    int ln = tok.line, co = tok.col;
    bump();
    PExp rhs = parse_sum();
    auto e = make_cmp(op, to_aexp(lhs), to_aexp(rhs));
    e->line = ln;
    e->col = co;
    return PExp{nullptr, e, "", ln, co};
  }

  PExp parse_sum() {
    PExp lhs = parse_term();
    while (at_punct("+") || at_punct("-")) {
      AOp op = at_punct("+") ? AOp::Add : AOp::Sub;
      int ln = tok.line, co = tok.col;
      bump();
      PExp rhs = parse_term();
      auto e = make_aexp(op, to_aexp(lhs), to_aexp(rhs));
      e->line = ln;
      e->col = co;
      lhs = PExp{e, nullptr, "", ln, co};
    }
    return lhs;
  }

  PExp parse_term() {
    PExp lhs = parse_factor();
    while (at_punct("*")) {
      int ln = tok.line, co = tok.col;
      bump();
      PExp rhs = parse_factor();
      auto e = make_aexp(AOp::Mul, to_aexp(lhs), to_aexp(rhs));
      e->line = ln;
      e->col = co;
      lhs = PExp{e, nullptr, "", ln, co};
    }
    return lhs;
  }

  PExp parse_factor() {
    int ln = tok.line, co = tok.col;
    if (at_punct("-")) {
      bump();
      PExp inner = parse_factor();
      auto e = make_aexp(AOp::Sub, make_num(0), to_aexp(inner));
      e->line = ln;
      e->col = co;
      return PExp{e, nullptr, "", ln, co};
    }
    if (at_punct("(")) {
      bump();
      PExp inner = parse_expr();
      expect_punct(")");
      return inner;
    }
    if (tok.kind == Tok::Num) {
      if (!tok.integral) err("only integer literals are allowed in program expressions");
      auto e = make_num(tok.inum);
      e->line = ln;
      e->col = co;
      bump();
      return PExp{e, nullptr, "", ln, co};
    }
    if (at_ident("true") || at_ident("false")) {
      auto e = make_blit(tok.text == "true");
      e->line = ln;
      e->col = co;
      bump();
      return PExp{nullptr, e, "", ln, co};
    }
    if (tok.kind == Tok::Ident) {
      if (is_keyword(tok.text)) err("keyword '" + tok.text + "' used as identifier");
      if (tok.text.find("__") != std::string::npos)
        err("identifiers containing \"__\" are reserved for synthesized names");
      std::string id = tok.text;
      bump();
      return PExp{nullptr, nullptr, id, ln, co};
    }
    err("expected an expression");
  }

  // --- matrix literals -----------------------------------------------------

  double parse_real_part() {
    double sign = 1.0;
    while (at_punct("+") || at_punct("-")) {
      if (at_punct("-")) sign = -sign;
      bump();
    }
    if (tok.kind != Tok::Num) err("expected a number");
    double v = tok.num;
    bump();
    return sign * v;
  }

  cplx parse_complex() {
    double first = parse_real_part();
    if (at_ident("i")) {
      bump();
      return cplx(0.0, first);
    }
    if (at_punct("+") || at_punct("-")) {
      // lookahead: number followed by i
      bool neg = at_punct("-");
      bump();
      if (tok.kind != Tok::Num) err("expected imaginary part");
      double im = tok.num;
      bump();
      if (!at_ident("i")) err("expected 'i' after imaginary part");
      bump();
      return cplx(first, neg ? -im : im);
    }
    return cplx(first, 0.0);
  }

  Matrix parse_matrix() {
    expect_punct("[");
    Matrix m;
    for (;;) {
      expect_punct("[");
      std::vector<cplx> row;
      if (!at_punct("]")) {
        for (;;) {
          row.push_back(parse_complex());
          if (at_punct(",")) {
            bump();
            continue;
          }
          break;
        }
      }
      expect_punct("]");
      m.push_back(std::move(row));
      if (at_punct(",")) {
        bump();
        continue;
      }
      break;
    }
    expect_punct("]");
    if (m.empty()) err("empty matrix literal");
    for (const auto& row : m)
      if (row.size() != m[0].size()) err("ragged matrix literal");
    return m;
  }

  // --- statements ------------------------------------------------------------

  StmtPtr parse_block() {
    expect_punct("{");
    StmtPtr s = parse_stmt_seq();
    expect_punct("}");
    return s;
  }

  // Statements are separated by ';', except after a block statement (if,
  // while, @summary), C style. A trailing ';' is tolerated.
  StmtPtr parse_stmt_seq() {
    StmtPtr s = parse_stmt();
    for (;;) {
      bool block = s->op == SOp::If || s->op == SOp::While || s->op == SOp::Summarized;
      if (s->op == SOp::Seq) {
        const Stmt* last = s.get();
        while (last->op == SOp::Seq) last = last->s2.get();
        block = last->op == SOp::If || last->op == SOp::While || last->op == SOp::Summarized;
      }
      bool sep = false;
      while (at_punct(";")) {
        bump();
        sep = true;
      }
      if (at_punct("}") || tok.kind == Tok::End) break;
      if (!sep && !block) break;
      StmtPtr rest = parse_stmt();
      s = make_seq(std::move(s), std::move(rest));
    }
    return s;
  }

  StmtPtr parse_stmt() {
    int ln = tok.line, co = tok.col;
    auto locate = [&](StmtPtr s) {
      const_cast<Stmt*>(s.get())->line = ln;
      const_cast<Stmt*>(s.get())->col = co;
      return s;
    };
    if (at_ident("skip")) {
      bump();
      return locate(make_stmt(SOp::Skip));
    }
    if (at_ident("consume")) {
      bump();
      expect_punct("(");
      PExp e = parse_expr();
      expect_punct(")");
      auto s = std::make_shared<Stmt>();
      s->op = SOp::Consume;
      s->aexp = to_aexp(e);
      return locate(s);
    }
    if (at_ident("if")) {
      bump();
      expect_punct("(");
      PExp c = parse_expr();
      expect_punct(")");
      StmtPtr t = parse_block();
      if (!at_ident("else")) err("expected 'else'");
      bump();
      StmtPtr f = parse_block();
      auto s = std::make_shared<Stmt>();
      s->op = SOp::If;
      s->bexp = to_bexp(c);
      s->s1 = std::move(t);
      s->s2 = std::move(f);
      return locate(s);
    }
    if (at_ident("while")) {
      bump();
      expect_punct("(");
      PExp c = parse_expr();
      expect_punct(")");
      StmtPtr b = parse_block();
      auto s = std::make_shared<Stmt>();
      s->op = SOp::While;
      s->bexp = to_bexp(c);
      s->s1 = std::move(b);
      return locate(s);
    }
    if (at_punct("@")) {
      bump();
      if (!at_ident("summary")) err("expected 'summary' after '@'");
      bump();
      expect_punct("(");
      std::string label = expect_ident();
      expect_punct(")");
      StmtPtr b = parse_block();
      auto s = std::make_shared<Stmt>();
      s->op = SOp::Summarized;
      s->var = label;
      s->s1 = std::move(b);
      return locate(s);
    }
    if (at_ident("call")) {
      bump();
      std::string name = expect_ident();
      expect_punct("(");
      std::vector<std::string> args;
      if (!at_punct(")")) {
        for (;;) {
          args.push_back(expect_ident());
          if (at_punct(",")) {
            bump();
            continue;
          }
          break;
        }
      }
      expect_punct(")");
      auto s = std::make_shared<Stmt>();
      s->op = SOp::Call;
      s->var = name;
      s->regs = std::move(args);
      return locate(s);
    }

    // remaining forms start with an identifier (or identifier list)
    std::string first = expect_ident();
    if (at_punct(",") || at_punct("*=")) {
      std::vector<std::string> regs{first};
      while (at_punct(",")) {
        bump();
        regs.push_back(expect_ident());
      }
      expect_punct("*=");
      auto s = std::make_shared<Stmt>();
      s->op = SOp::Apply;
      s->regs = std::move(regs);
      s->unitary.line = tok.line;
      s->unitary.col = tok.col;
      if (tok.kind == Tok::Ident) {
        std::string g = tok.text;
        if (g == "H") s->unitary.kind = GateKind::H;
        else if (g == "X") s->unitary.kind = GateKind::X;
        else if (g == "T") s->unitary.kind = GateKind::T;
        else if (g == "CNOT") s->unitary.kind = GateKind::CNOT;
        else if (g == "CZ") s->unitary.kind = GateKind::CZ;
        else if (g == "SHIFT") s->unitary.kind = GateKind::SHIFT;
        else err("unknown gate '" + g + "'");
        bump();
      } else if (at_punct("[")) {
        s->unitary.kind = GateKind::Matrix;
        s->unitary.mat = parse_matrix();
      } else {
        err("expected a gate name or matrix literal");
      }
      return locate(s);
    }
    expect_punct("=");
    if (at_ident("meas") || at_ident("measzero")) {
      bool zero = tok.text == "measzero";
      bump();
      expect_punct("(");
      std::string reg = expect_ident();
      expect_punct(")");
      auto s = std::make_shared<Stmt>();
      s->op = zero ? SOp::MeasureZero : SOp::Measure;
      s->var = first;
      s->reg = reg;
      return locate(s);
    }
    if (tok.kind == Tok::KetZero || tok.kind == Tok::KetPlus) {
      auto s = std::make_shared<Stmt>();
      s->op = tok.kind == Tok::KetZero ? SOp::PrepZero : SOp::PrepPlus;
      s->reg = first;
      bump();
      return locate(s);
    }
    PExp e = parse_expr();
    auto s = std::make_shared<Stmt>();
    s->var = first;
    auto kind = decl_kinds.find(first);
    if (e.b || (kind != decl_kinds.end() && kind->second == Decl::Kind::Bool)) {
      s->op = SOp::AssignBool;
      s->bexp = to_bexp(e);
    } else if (e.a || (kind != decl_kinds.end() && kind->second == Decl::Kind::Int)) {
      s->op = SOp::AssignInt;
      s->aexp = to_aexp(e);
    } else {
      // undeclared target and a bare-name right-hand side
      err_at("cannot determine whether '" + first + " = " + e.ambig +
                 "' assigns a bool or an int; declare one of the variables",
             ln, co);
    }
    return locate(s);
  }

  Program parse_program() {
    Program p;
    for (;;) {
      if (at_ident("bool") || at_ident("int")) {
        Decl d;
        d.kind = tok.text == "bool" ? Decl::Kind::Bool : Decl::Kind::Int;
        d.line = tok.line;
        d.col = tok.col;
        bump();
        d.id = expect_ident();
        expect_punct(";");
        decl_kinds[d.id] = d.kind;
        p.decls.push_back(std::move(d));
        continue;
      }
      if (at_ident("qreg")) {
        Decl d;
        d.kind = Decl::Kind::QReg;
        d.line = tok.line;
        d.col = tok.col;
        bump();
        d.id = expect_ident();
        expect_punct("[");
        if (tok.kind != Tok::Num || !tok.integral) err("expected register dimension");
        d.dim = static_cast<int>(tok.inum);
        bump();
        expect_punct("]");
        expect_punct(";");
        decl_kinds[d.id] = d.kind;
        p.decls.push_back(std::move(d));
        continue;
      }
      if (at_ident("proc")) {
        Proc pr;
        pr.line = tok.line;
        pr.col = tok.col;
        bump();
        pr.name = expect_ident();
        expect_punct("(");
        if (!at_punct(")")) {
          for (;;) {
            pr.params.push_back(expect_ident());
            if (at_punct(",")) {
              bump();
              continue;
            }
            break;
          }
        }
        expect_punct(")");
        pr.body = parse_block();
        p.procs.push_back(std::move(pr));
        continue;
      }
      break;
    }
    if (tok.kind == Tok::End) fail(ErrorKind::Syntax, "program has no body", tok.line, tok.col);
    p.body = parse_stmt_seq();
    if (tok.kind != Tok::End) err("trailing input after program body");
    return p;
  }
};

}  // namespace

Program parse_program(const std::string& text) {
  Parser p(text);
  return p.parse_program();
}

}  // namespace qet
