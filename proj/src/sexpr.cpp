#include "qet/sexpr.hpp"

#include <cctype>
#include <cstdlib>
#include <limits>

#include "qet/errors.hpp"

namespace qet {

namespace {

struct SReader {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit SReader(const std::string& s) : src(s) {}

  char peek(std::size_t off = 0) const { return pos + off < src.size() ? src[pos + off] : '\0'; }

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
      if (peek() == ';' || (peek() == '/' && peek(1) == '/')) {
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      break;
    }
  }

  [[noreturn]] void err(const std::string& msg) { fail(ErrorKind::Syntax, msg, line, col); }

  bool num_start() const {
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) return true;
    if ((c == '-' || c == '+') && std::isdigit(static_cast<unsigned char>(peek(1)))) return true;
    return false;
  }

  double read_real() {
    std::string tok;
    if (peek() == '+' || peek() == '-') {
      tok += peek();
      advance();
    }
    bool integral = true;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      tok += peek();
      advance();
    }
    if (peek() == '.') {
      integral = false;
      tok += peek();
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        tok += peek();
        advance();
      }
    }
    if (peek() == 'e' || peek() == 'E') {
      integral = false;
      tok += peek();
      advance();
      if (peek() == '+' || peek() == '-') {
        tok += peek();
        advance();
      }
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        tok += peek();
        advance();
      }
    }
    if (tok.empty() || tok == "+" || tok == "-") err("expected a number");
    (void)integral;
    return std::strtod(tok.c_str(), nullptr);
  }

  // number with optional /denominator
  void read_number(SNode& n) {
    n.kind = SNode::Kind::Num;
    std::size_t start = pos;
    double v = read_real();
    bool fraction = false;
    if (peek() == '/') {
      advance();
      double d = read_real();
      if (d == 0.0) err("fraction with zero denominator");
      v = v / d;
      fraction = true;
    }
    n.num = v;
    std::string text = src.substr(start, pos - start);
    n.integral = !fraction && text.find('.') == std::string::npos &&
                 text.find('e') == std::string::npos && text.find('E') == std::string::npos;
    if (n.integral) n.inum = std::strtoll(text.c_str(), nullptr, 10);
  }

  cplx read_complex() {
    double first = peek() == 'i' ? 1.0 : read_real();
    if (peek() == '/') {
      advance();
      double d = read_real();
      if (d == 0.0) err("fraction with zero denominator");
      first /= d;
    }
    if (peek() == 'i') {
      advance();
      return cplx(0.0, first);
    }
    if (peek() == '+' || peek() == '-') {
      std::size_t save_pos = pos;
      int save_line = line, save_col = col;
      double im = read_real();
      if (peek() == '/') {
        advance();
        double d = read_real();
        if (d == 0.0) err("fraction with zero denominator");
        im /= d;
      }
      if (peek() == 'i') {
        advance();
        return cplx(first, im);
      }
      pos = save_pos;
      line = save_line;
      col = save_col;
    }
    return cplx(first, 0.0);
  }

  Matrix read_matrix() {
    // at '['
    advance();
    Matrix m;
    for (;;) {
      skip_ws();
      if (peek() != '[') err("expected '[' to start a matrix row");
      advance();
      std::vector<cplx> row;
      skip_ws();
      if (peek() != ']') {
        for (;;) {
          skip_ws();
          row.push_back(read_complex());
          skip_ws();
          if (peek() == ',') {
            advance();
            continue;
          }
          break;
        }
      }
      skip_ws();
      if (peek() != ']') err("expected ']' to end a matrix row");
      advance();
      m.push_back(std::move(row));
      skip_ws();
      if (peek() == ',') {
        advance();
        continue;
      }
      break;
    }
    skip_ws();
    if (peek() != ']') err("expected ']' to end a matrix");
    advance();
    if (m.empty()) err("empty matrix");
    for (const auto& row : m)
      if (row.size() != m[0].size()) err("ragged matrix");
    return m;
  }

  SNode read_node() {
    skip_ws();
    SNode n;
    n.line = line;
    n.col = col;
    if (pos >= src.size()) err("unexpected end of input");
    char c = peek();
    if (c == '(') {
      advance();
      n.kind = SNode::Kind::List;
      for (;;) {
        skip_ws();
        if (peek() == ')') {
          advance();
          return n;
        }
        if (pos >= src.size()) err("unterminated list");
        n.items.push_back(read_node());
      }
    }
    if (c == '[') {
      n.kind = SNode::Kind::Mat;
      n.mat = read_matrix();
      return n;
    }
    if (num_start()) {
      read_number(n);
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '-' ||
        c == '*' || c == '<' || c == '=' || c == '!') {
      std::string sym;
      while (pos < src.size() && !std::isspace(static_cast<unsigned char>(peek())) &&
             peek() != '(' && peek() != ')' && peek() != '[' && peek() != ']') {
        sym += peek();
        advance();
      }
      if (sym == "inf") {
        n.kind = SNode::Kind::Num;
        n.num = std::numeric_limits<double>::infinity();
        return n;
      }
      n.kind = SNode::Kind::Sym;
      n.sym = sym;
      return n;
    }
    err(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

std::vector<SNode> parse_sexprs(const std::string& text) {
  SReader r(text);
  std::vector<SNode> out;
  for (;;) {
    r.skip_ws();
    if (r.pos >= text.size()) break;
    out.push_back(r.read_node());
  }
  return out;
}

}  // namespace qet
