#include "qcf/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <functional>

namespace qcf {

namespace {

enum class Tok {
  Ident,
  Number,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Minus,
  Newline,
  End
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Minus: return "'-'";
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_blanks();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = src_[pos_];
    if (c == '\n') {
      advance();
      t.kind = Tok::Newline;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        t.text += src_[pos_];
        advance();
      }
      t.kind = Tok::Ident;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E' ||
              ((src_[pos_] == '+' || src_[pos_] == '-') && pos_ > start &&
               (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E'))))
        advance();
      t.kind = Tok::Number;
      t.text = src_.substr(start, pos_ - start);
      t.number = std::strtod(t.text.c_str(), nullptr);
      return t;
    }
    advance();
    switch (c) {
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case '{': t.kind = Tok::LBrace; return t;
      case '}': t.kind = Tok::RBrace; return t;
      case '[': t.kind = Tok::LBracket; return t;
      case ']': t.kind = Tok::RBracket; return t;
      case ',': t.kind = Tok::Comma; return t;
      case '-': t.kind = Tok::Minus; return t;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'",
                         t.line, t.column);
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blanks() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else {
        break;
      }
    }
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lexer_(src) { cur_ = lexer_.next(); }

  Program parse_program() {
    Program program;
    skip_newlines();
    while (cur_.kind != Tok::End) {
      program.kernels.push_back(parse_kernel());
      skip_newlines();
    }
    if (program.kernels.empty())
      throw ParseError("expected at least one __qpu__ kernel", cur_.line,
                       cur_.column);
    validate(program);
    return program;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) {
    throw ParseError("expected " + expected + ", found " +
                         std::string(tok_name(cur_.kind)),
                     cur_.line, cur_.column);
  }

  void bump() { cur_ = lexer_.next(); }

  void skip_newlines() {
    while (cur_.kind == Tok::Newline) bump();
  }

  Token expect(Tok kind, const std::string& what) {
    if (cur_.kind != kind) fail(what);
    Token t = cur_;
    bump();
    return t;
  }

  std::string expect_ident(const std::string& what) {
    return expect(Tok::Ident, what).text;
  }

  void expect_keyword(const std::string& word) {
    if (cur_.kind != Tok::Ident || cur_.text != word) fail("'" + word + "'");
    bump();
  }

  uint32_t expect_qubit(const std::string& what) {
    if (cur_.kind != Tok::Number) fail(what);
    if (cur_.text.find_first_of(".eE") != std::string::npos)
      throw ParseError("qubit index must be an integer", cur_.line, cur_.column);
    uint32_t q = static_cast<uint32_t>(cur_.number);
    bump();
    return q;
  }

  ParamExpr parse_expr() {
    if (cur_.kind == Tok::Minus) {
      bump();
      if (cur_.kind == Tok::Ident) {
        std::string name = cur_.text;
        bump();
        return ParamExpr::sym(name, true);
      }
      if (cur_.kind == Tok::Number) {
        double v = cur_.number;
        bump();
        return ParamExpr::literal(-v);
      }
      fail("symbol or number after '-'");
    }
    if (cur_.kind == Tok::Number) {
      double v = cur_.number;
      bump();
      return ParamExpr::literal(v);
    }
    if (cur_.kind == Tok::Ident) {
      std::string name = cur_.text;
      bump();
      return ParamExpr::sym(name, false);
    }
    fail("parameter expression");
  }

  Kernel parse_kernel() {
    expect_keyword("__qpu__");
    Kernel k;
    k.name = expect_ident("kernel name");
    expect(Tok::LParen, "'('");
    expect_keyword("AcceleratorBuffer");
    expect_ident("buffer name");
    while (cur_.kind == Tok::Comma) {
      bump();
      expect_keyword("double");
      k.params.push_back(expect_ident("parameter name"));
    }
    expect(Tok::RParen, "')'");
    expect(Tok::LBrace, "'{'");
    skip_newlines();
    while (cur_.kind != Tok::RBrace) {
      if (cur_.kind == Tok::End) fail("'}'");
      k.body.push_back(parse_stmt());
      if (cur_.kind != Tok::RBrace) expect(Tok::Newline, "end of line");
      skip_newlines();
    }
    bump();  // consume '}'
    return k;
  }

  Instruction parse_stmt() {
    Token head = cur_;
    std::string name = expect_ident("instruction");
    if (name == "X" || name == "Y" || name == "Z" || name == "H")
      return Instruction::gate1(*gate_from_name(name),
                                expect_qubit("qubit index"));
    if (name == "CNOT" || name == "SWAP") {
      uint32_t a = expect_qubit("qubit index");
      if (cur_.kind != Tok::Number)
        throw ParseError("expected second qubit index", cur_.line, cur_.column);
      uint32_t b = expect_qubit("second qubit index");
      if (a == b)
        throw ParseError(name + " operands must be distinct", head.line,
                         head.column);
      return name == "CNOT" ? Instruction::cnot(a, b)
                            : Instruction::swap_gate(a, b);
    }
    if (name == "RX" || name == "RY" || name == "RZ") {
      expect(Tok::LParen, "'('");
      ParamExpr angle = parse_expr();
      expect(Tok::RParen, "')'");
      return Instruction::rotation(*gate_from_name(name), std::move(angle),
                                   expect_qubit("qubit index"));
    }
    if (name == "MEASURE") {
      uint32_t q = expect_qubit("qubit index");
      expect(Tok::LBracket, "'['");
      uint32_t c = expect_qubit("classical bit index");
      expect(Tok::RBracket, "']'");
      return Instruction::measure(q, c);
    }
    // Kernel call: name(buffer, expr...)
    expect(Tok::LParen, "'('");
    expect_ident("buffer argument");
    std::vector<ParamExpr> args;
    while (cur_.kind == Tok::Comma) {
      bump();
      args.push_back(parse_expr());
    }
    expect(Tok::RParen, "')'");
    return Instruction::call(name, std::move(args));
  }

  Lexer lexer_;
  Token cur_;
};

}  // namespace

Program parse(const std::string& source) {
  Parser parser(source);
  return parser.parse_program();
}

namespace {

ParamExpr substitute(const ParamExpr& e,
                     const std::map<std::string, ParamExpr>& subst) {
  if (!e.is_symbol()) return e;
  auto it = subst.find(e.symbol);
  if (it == subst.end()) return e;
  ParamExpr out = it->second;
  if (e.negated) {
    if (out.is_symbol())
      out.negated = !out.negated;
    else
      out.value = -out.value;
  }
  return out;
}

void inline_body(const Program& program, const Kernel& kernel,
                 const std::map<std::string, ParamExpr>& subst,
                 std::vector<Instruction>& out) {
  for (const auto& ins : kernel.body) {
    if (ins.kind != GateKind::Call) {
      Instruction copy = ins;
      if (copy.param) copy.param = substitute(*copy.param, subst);
      out.push_back(std::move(copy));
      continue;
    }
    const Kernel* callee = program.find(ins.callee);
    if (!callee)
      throw ValidationError("call to undefined kernel '" + ins.callee + "'");
    if (ins.args.size() != callee->params.size())
      throw ValidationError("call to '" + ins.callee + "' passes " +
                            std::to_string(ins.args.size()) +
                            " arguments, expected " +
                            std::to_string(callee->params.size()));
    std::map<std::string, ParamExpr> inner;
    for (size_t i = 0; i < ins.args.size(); ++i)
      inner[callee->params[i]] = substitute(ins.args[i], subst);
    inline_body(program, *callee, inner, out);
  }
}

}  // namespace

Kernel resolve_calls(const Program& program, const std::string& entry) {
  const Kernel* k = program.find(entry);
  if (!k) throw ValidationError("unknown kernel '" + entry + "'");
  validate(program);
  Kernel out;
  out.name = k->name;
  out.params = k->params;
  inline_body(program, *k, {}, out.body);
  return out;
}

}  // namespace qcf
