#include "mixprec/nir.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace mixprec {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::FConst: return "fconst";
    case Opcode::FAdd: return "fadd";
    case Opcode::FSub: return "fsub";
    case Opcode::FMul: return "fmul";
    case Opcode::FDiv: return "fdiv";
    case Opcode::FpExt: return "fpext";
    case Opcode::FpTrunc: return "fptrunc";
    case Opcode::FCall: return "fcall";
    case Opcode::FCmp: return "fcmp";
    case Opcode::IConst: return "iconst";
    case Opcode::IAdd: return "iadd";
    case Opcode::ISub: return "isub";
    case Opcode::IMul: return "imul";
    case Opcode::ICmp: return "icmp";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::Idx: return "idx";
    case Opcode::Br: return "br";
    case Opcode::BrCond: return "brcond";
    case Opcode::Phi: return "phi";
    case Opcode::Ret: return "ret";
  }
  return "?";
}

const char* intrinsic_name(Intrinsic f) {
  switch (f) {
    case Intrinsic::Sin: return "sin";
    case Intrinsic::Exp: return "exp";
    case Intrinsic::Sqrt: return "sqrt";
    case Intrinsic::Fabs: return "fabs";
  }
  return "?";
}

const char* cmp_pred_name(CmpPred p) {
  switch (p) {
    case CmpPred::Lt: return "lt";
    case CmpPred::Le: return "le";
    case CmpPred::Eq: return "eq";
  }
  return "?";
}

const char* type_name(Type t) {
  switch (t) {
    case Type::I64: return "i64";
    case Type::F32: return "f32";
    case Type::F64: return "f64";
  }
  return "?";
}

std::string to_string(const InstrId& id) {
  return "@" + id.function + ":%" + id.dest;
}

ParseError::ParseError(const std::string& msg, int line_, int col_)
    : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                         std::to_string(col_) + ": " + msg),
      line(line_),
      col(col_) {}

uint64_t fnv1a(const void* data, size_t len, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string program_hash(const Program& p) {
  std::string text = print_program(p);
  return hash_hex(fnv1a(text.data(), text.size()));
}

bool defines_value(Opcode op) {
  switch (op) {
    case Opcode::Store:
    case Opcode::Br:
    case Opcode::BrCond:
    case Opcode::Ret:
      return false;
    default:
      return true;
  }
}

bool defines_float(const Instr& in) {
  switch (in.op) {
    case Opcode::FConst:
    case Opcode::FAdd:
    case Opcode::FSub:
    case Opcode::FMul:
    case Opcode::FDiv:
    case Opcode::FCall:
      return true;
    case Opcode::FpExt:
    case Opcode::FpTrunc:
      return true;
    case Opcode::Load:
    case Opcode::Phi:
      return in.type == Type::F32 || in.type == Type::F64;
    default:
      return false;
  }
}

bool is_promotable(Opcode op) {
  switch (op) {
    case Opcode::FAdd:
    case Opcode::FSub:
    case Opcode::FMul:
    case Opcode::FDiv:
    case Opcode::FCall:
      return true;
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

enum class Tok { Ident, Reg, Global, Label, Num, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;
  Token cur;

  explicit Lexer(const std::string& s) : src(s) { next(); }

  void advance_char() {
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
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
        advance_char();
      if (pos + 1 < src.size() && src[pos] == '/' && src[pos + 1] == '/') {
        while (pos < src.size() && src[pos] != '\n') advance_char();
        continue;
      }
      break;
    }
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  }

  void next() {
    skip_ws();
    cur.line = line;
    cur.col = col;
    if (pos >= src.size()) {
      cur = {Tok::End, "", line, col};
      return;
    }
    char c = src[pos];
    if (c == '%' || c == '@') {
      Tok k = c == '%' ? Tok::Reg : Tok::Global;
      advance_char();
      std::string t;
      while (pos < src.size() && ident_char(src[pos])) {
        t += src[pos];
        advance_char();
      }
      if (t.empty()) throw ParseError("empty identifier after sigil", cur.line, cur.col);
      cur = {k, t, cur.line, cur.col};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string t;
      while (pos < src.size() && ident_char(src[pos])) {
        t += src[pos];
        advance_char();
      }
      cur = {Tok::Ident, t, cur.line, cur.col};
      return;
    }
    bool signed_num = (c == '-' || c == '+') && pos + 1 < src.size() &&
                      (std::isdigit(static_cast<unsigned char>(src[pos + 1])) ||
                       src[pos + 1] == '.');
    if (std::isdigit(static_cast<unsigned char>(c)) || signed_num) {
      std::string t;
      t += c;
      advance_char();
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '.' ||
              src[pos] == '+' || src[pos] == '-')) {
        // exponent signs only directly after e/E
        if ((src[pos] == '+' || src[pos] == '-') &&
            !(t.back() == 'e' || t.back() == 'E'))
          break;
        t += src[pos];
        advance_char();
      }
      cur = {Tok::Num, t, cur.line, cur.col};
      return;
    }
    std::string t(1, c);
    advance_char();
    cur = {Tok::Punct, t, cur.line, cur.col};
  }
};

struct Parser {
  Lexer lex;
  explicit Parser(const std::string& s) : lex(s) {}

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, lex.cur.line, lex.cur.col);
  }

  bool at_punct(const char* p) { return lex.cur.kind == Tok::Punct && lex.cur.text == p; }
  bool at_ident(const char* w) { return lex.cur.kind == Tok::Ident && lex.cur.text == w; }

  void expect_punct(const char* p) {
    if (!at_punct(p)) fail(std::string("expected '") + p + "', got '" + lex.cur.text + "'");
    lex.next();
  }

  std::string expect_reg() {
    if (lex.cur.kind != Tok::Reg) fail("expected register, got '" + lex.cur.text + "'");
    std::string t = lex.cur.text;
    lex.next();
    return t;
  }

  std::string expect_ident() {
    if (lex.cur.kind != Tok::Ident) fail("expected identifier, got '" + lex.cur.text + "'");
    std::string t = lex.cur.text;
    lex.next();
    return t;
  }

  int64_t expect_int() {
    if (lex.cur.kind != Tok::Num) fail("expected integer, got '" + lex.cur.text + "'");
    int64_t v = 0;
    auto& t = lex.cur.text;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      fail("bad integer literal '" + t + "'");
    lex.next();
    return v;
  }

  double expect_float() {
    if (lex.cur.kind != Tok::Num) fail("expected number, got '" + lex.cur.text + "'");
    char* end = nullptr;
    double v = std::strtod(lex.cur.text.c_str(), &end);
    if (end != lex.cur.text.c_str() + lex.cur.text.size())
      fail("bad float literal '" + lex.cur.text + "'");
    lex.next();
    return v;
  }

  Type expect_float_type() {
    std::string t = expect_ident();
    if (t == "f32") return Type::F32;
    if (t == "f64") return Type::F64;
    fail("expected f32 or f64, got '" + t + "'");
  }

  Type expect_any_type() {
    std::string t = expect_ident();
    if (t == "f32") return Type::F32;
    if (t == "f64") return Type::F64;
    if (t == "i64") return Type::I64;
    fail("expected type, got '" + t + "'");
  }

  Operand expect_operand() {
    if (lex.cur.kind == Tok::Reg) return Operand::make_reg(expect_reg());
    if (lex.cur.kind == Tok::Num) return Operand::make_imm(expect_int());
    fail("expected register or integer, got '" + lex.cur.text + "'");
  }

  Program parse() {
    Program p;
    while (lex.cur.kind != Tok::End) {
      if (!at_ident("func")) fail("expected 'func'");
      lex.next();
      p.functions.push_back(parse_function());
    }
    if (p.functions.empty()) fail("empty program");
    p.entry = p.functions.front().name;
    return p;
  }

  std::set<std::string> defined;  // per function, for early duplicate checks

  Function parse_function() {
    Function f;
    defined.clear();
    if (lex.cur.kind != Tok::Global) fail("expected @name");
    f.name = lex.cur.text;
    lex.next();
    expect_punct("(");
    if (!at_punct(")")) {
      for (;;) {
        Param prm;
        prm.name = expect_reg();
        if (!defined.insert(prm.name).second)
          fail("duplicate definition of %" + prm.name);
        expect_punct(":");
        prm.type = parse_param_type();
        f.params.push_back(std::move(prm));
        if (at_punct(",")) {
          lex.next();
          continue;
        }
        break;
      }
    }
    expect_punct(")");
    expect_punct("-");
    expect_punct(">");
    if (at_ident("void")) {
      lex.next();
      f.ret = std::nullopt;
    } else {
      f.ret = expect_any_type();
    }
    expect_punct("{");
    while (!at_punct("}")) {
      f.blocks.push_back(parse_block());
    }
    expect_punct("}");
    if (f.blocks.empty()) fail("function '" + f.name + "' has no blocks");
    return f;
  }

  ParamType parse_param_type() {
    if (at_ident("arr")) {
      lex.next();
      expect_punct("<");
      Type elem = expect_float_type();
      expect_punct(",");
      int64_t len = expect_int();
      expect_punct(">");
      return ParamType{true, elem, len};
    }
    return ParamType{false, expect_any_type(), 0};
  }

  Block parse_block() {
    Block b;
    b.label = expect_ident();
    expect_punct(":");
    for (;;) {
      if (at_punct("}")) break;
      // a new block starts at "ident :"
      if (lex.cur.kind == Tok::Ident) {
        // lookahead over the instruction keywords that start destless instrs
        auto& t = lex.cur.text;
        if (t != "store" && t != "br" && t != "brcond" && t != "ret") break;
      }
      b.instrs.push_back(parse_instr());
      if (b.instrs.back().op == Opcode::Br || b.instrs.back().op == Opcode::BrCond ||
          b.instrs.back().op == Opcode::Ret)
        break;
    }
    return b;
  }

  Instr parse_instr() {
    Instr in;
    if (lex.cur.kind == Tok::Reg) {
      int dline = lex.cur.line, dcol = lex.cur.col;
      in.dest = expect_reg();
      if (!defined.insert(in.dest).second)
        throw ParseError("duplicate definition of %" + in.dest, dline, dcol);
      expect_punct("=");
      std::string op = expect_ident();
      parse_valued(in, op);
      return in;
    }
    std::string op = expect_ident();
    if (op == "store") {
      in.op = Opcode::Store;
      in.type = expect_float_type();
      in.args.push_back(Operand::make_reg(expect_reg()));  // array
      expect_punct(",");
      in.args.push_back(expect_operand());  // index
      expect_punct(",");
      in.args.push_back(expect_operand());  // value (register in practice)
      return in;
    }
    if (op == "br") {
      in.op = Opcode::Br;
      in.labels.push_back(expect_ident());
      return in;
    }
    if (op == "brcond") {
      in.op = Opcode::BrCond;
      in.args.push_back(expect_operand());
      expect_punct(",");
      in.labels.push_back(expect_ident());
      expect_punct(",");
      in.labels.push_back(expect_ident());
      return in;
    }
    if (op == "ret") {
      in.op = Opcode::Ret;
      if (lex.cur.kind == Tok::Reg) in.args.push_back(Operand::make_reg(expect_reg()));
      return in;
    }
    fail("unknown opcode '" + op + "'");
  }

  void parse_valued(Instr& in, const std::string& op) {
    auto binary_f = [&](Opcode o) {
      in.op = o;
      in.type = expect_float_type();
      in.args.push_back(Operand::make_reg(expect_reg()));
      expect_punct(",");
      in.args.push_back(Operand::make_reg(expect_reg()));
    };
    auto binary_i = [&](Opcode o) {
      in.op = o;
      in.type = Type::I64;
      in.args.push_back(expect_operand());
      expect_punct(",");
      in.args.push_back(expect_operand());
    };
    if (op == "fconst") {
      in.op = Opcode::FConst;
      in.type = expect_float_type();
      in.fimm = expect_float();
      if (in.type == Type::F32) in.fimm = static_cast<double>(static_cast<float>(in.fimm));
      return;
    }
    if (op == "fadd") return binary_f(Opcode::FAdd);
    if (op == "fsub") return binary_f(Opcode::FSub);
    if (op == "fmul") return binary_f(Opcode::FMul);
    if (op == "fdiv") return binary_f(Opcode::FDiv);
    if (op == "fpext") {
      in.op = Opcode::FpExt;
      in.type = Type::F64;
      in.args.push_back(Operand::make_reg(expect_reg()));
      return;
    }
    if (op == "fptrunc") {
      in.op = Opcode::FpTrunc;
      in.type = Type::F32;
      in.args.push_back(Operand::make_reg(expect_reg()));
      return;
    }
    if (op == "fcall") {
      in.op = Opcode::FCall;
      std::string f = expect_ident();
      if (f == "sin") in.intr = Intrinsic::Sin;
      else if (f == "exp") in.intr = Intrinsic::Exp;
      else if (f == "sqrt") in.intr = Intrinsic::Sqrt;
      else if (f == "fabs") in.intr = Intrinsic::Fabs;
      else fail("unknown intrinsic '" + f + "'");
      in.type = expect_float_type();
      in.args.push_back(Operand::make_reg(expect_reg()));
      return;
    }
    if (op == "fcmp") {
      in.op = Opcode::FCmp;
      in.pred = parse_pred();
      in.type = expect_float_type();
      in.args.push_back(Operand::make_reg(expect_reg()));
      expect_punct(",");
      in.args.push_back(Operand::make_reg(expect_reg()));
      return;
    }
    if (op == "iconst") {
      in.op = Opcode::IConst;
      in.type = Type::I64;
      in.iimm = expect_int();
      return;
    }
    if (op == "iadd") return binary_i(Opcode::IAdd);
    if (op == "isub") return binary_i(Opcode::ISub);
    if (op == "imul") return binary_i(Opcode::IMul);
    if (op == "icmp") {
      in.pred = parse_pred();
      binary_i(Opcode::ICmp);
      return;
    }
    if (op == "load") {
      in.op = Opcode::Load;
      in.type = expect_float_type();
      in.args.push_back(Operand::make_reg(expect_reg()));
      expect_punct(",");
      in.args.push_back(expect_operand());
      return;
    }
    if (op == "idx") {
      in.op = Opcode::Idx;
      in.type = Type::I64;
      in.args.push_back(expect_operand());
      expect_punct(",");
      in.args.push_back(expect_operand());
      expect_punct(",");
      in.args.push_back(expect_operand());
      return;
    }
    if (op == "phi") {
      in.op = Opcode::Phi;
      in.type = expect_any_type();
      for (;;) {
        expect_punct("[");
        if (in.type == Type::I64) {
          in.args.push_back(expect_operand());
        } else {
          in.args.push_back(Operand::make_reg(expect_reg()));
        }
        expect_punct(",");
        in.labels.push_back(expect_ident());
        expect_punct("]");
        if (at_punct(",")) {
          lex.next();
          continue;
        }
        break;
      }
      return;
    }
    fail("unknown opcode '" + op + "'");
  }

  CmpPred parse_pred() {
    std::string t = expect_ident();
    if (t == "lt") return CmpPred::Lt;
    if (t == "le") return CmpPred::Le;
    if (t == "eq") return CmpPred::Eq;
    fail("unknown predicate '" + t + "'");
  }
};

std::string format_float(double v, Type t) {
  char buf[64];
  if (t == Type::F32)
    std::snprintf(buf, sizeof buf, "%.9g", v);
  else
    std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_operand(std::ostringstream& os, const Operand& o) {
  if (o.is_imm)
    os << o.imm;
  else
    os << '%' << o.reg;
}

}  // namespace

Program parse_program(const std::string& source) {
  Parser parser(source);
  return parser.parse();
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  bool first_fn = true;
  for (const auto& f : p.functions) {
    if (!first_fn) os << '\n';
    first_fn = false;
    os << "func @" << f.name << "(";
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) os << ", ";
      const auto& prm = f.params[i];
      os << '%' << prm.name << ": ";
      if (prm.type.is_array)
        os << "arr<" << type_name(prm.type.elem) << "," << prm.type.length << ">";
      else
        os << type_name(prm.type.elem);
    }
    os << ") -> " << (f.ret ? type_name(*f.ret) : "void") << " {\n";
    for (const auto& b : f.blocks) {
      os << b.label << ":\n";
      for (const auto& in : b.instrs) {
        os << "  ";
        if (!in.dest.empty()) os << '%' << in.dest << " = ";
        switch (in.op) {
          case Opcode::FConst:
            os << "fconst " << type_name(in.type) << ' ' << format_float(in.fimm, in.type);
            break;
          case Opcode::FAdd:
          case Opcode::FSub:
          case Opcode::FMul:
          case Opcode::FDiv:
            os << opcode_name(in.op) << ' ' << type_name(in.type) << ' ';
            print_operand(os, in.args[0]);
            os << ", ";
            print_operand(os, in.args[1]);
            break;
          case Opcode::FpExt:
          case Opcode::FpTrunc:
            os << opcode_name(in.op) << ' ';
            print_operand(os, in.args[0]);
            break;
          case Opcode::FCall:
            os << "fcall " << intrinsic_name(in.intr) << ' ' << type_name(in.type) << ' ';
            print_operand(os, in.args[0]);
            break;
          case Opcode::FCmp:
            os << "fcmp " << cmp_pred_name(in.pred) << ' ' << type_name(in.type) << ' ';
            print_operand(os, in.args[0]);
            os << ", ";
            print_operand(os, in.args[1]);
            break;
          case Opcode::IConst:
            os << "iconst " << in.iimm;
            break;
          case Opcode::IAdd:
          case Opcode::ISub:
          case Opcode::IMul:
            os << opcode_name(in.op) << ' ';
            print_operand(os, in.args[0]);
            os << ", ";
            print_operand(os, in.args[1]);
            break;
          case Opcode::ICmp:
            os << "icmp " << cmp_pred_name(in.pred) << ' ';
            print_operand(os, in.args[0]);
            os << ", ";
            print_operand(os, in.args[1]);
            break;
          case Opcode::Load:
            os << "load " << type_name(in.type) << ' ';
            print_operand(os, in.args[0]);
            os << ", ";
            print_operand(os, in.args[1]);
            break;
          case Opcode::Store:
            os << "store " << type_name(in.type) << ' ';
            print_operand(os, in.args[0]);
            os << ", ";
            print_operand(os, in.args[1]);
            os << ", ";
            print_operand(os, in.args[2]);
            break;
          case Opcode::Idx:
            os << "idx ";
            print_operand(os, in.args[0]);
            os << ", ";
            print_operand(os, in.args[1]);
            os << ", ";
            print_operand(os, in.args[2]);
            break;
          case Opcode::Br:
            os << "br " << in.labels[0];
            break;
          case Opcode::BrCond:
            os << "brcond ";
            print_operand(os, in.args[0]);
            os << ", " << in.labels[0] << ", " << in.labels[1];
            break;
          case Opcode::Phi:
            os << "phi " << type_name(in.type) << ' ';
            for (size_t i = 0; i < in.args.size(); ++i) {
              if (i) os << ", ";
              os << '[';
              print_operand(os, in.args[i]);
              os << ", " << in.labels[i] << ']';
            }
            break;
          case Opcode::Ret:
            os << "ret";
            if (!in.args.empty()) {
              os << ' ';
              print_operand(os, in.args[0]);
            }
            break;
        }
        os << '\n';
      }
    }
    os << "}\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

struct FnAnalysis {
  const Function& f;
  std::map<std::string, int> block_index;
  std::vector<std::vector<int>> preds, succs;
  std::vector<std::vector<bool>> dom;  // dom[b] = blocks dominating b
  // value name -> (block, instr position) or param
  struct Def {
    bool is_param = false;
    int block = -1;
    int pos = -1;
    Type type = Type::I64;
    bool is_array = false;
    int64_t array_len = 0;
  };
  std::map<std::string, Def> defs;
  bool cfg_ok = true;

  explicit FnAnalysis(const Function& fn) : f(fn) {}

  bool dominates(int a, int b) const { return dom[b][a]; }
};

void compute_cfg(FnAnalysis& fa, std::vector<Violation>* out) {
  const Function& f = fa.f;
  for (size_t i = 0; i < f.blocks.size(); ++i) {
    if (!fa.block_index.emplace(f.blocks[i].label, static_cast<int>(i)).second) {
      out->push_back({{f.name, ""}, "duplicate block label '" + f.blocks[i].label + "'"});
      fa.cfg_ok = false;
    }
  }
  int n = static_cast<int>(f.blocks.size());
  fa.preds.assign(n, {});
  fa.succs.assign(n, {});
  for (int i = 0; i < n; ++i) {
    const Block& b = f.blocks[i];
    if (b.instrs.empty()) {
      out->push_back({{f.name, ""}, "block '" + b.label + "' is empty"});
      fa.cfg_ok = false;
      continue;
    }
    const Instr& term = b.instrs.back();
    if (term.op != Opcode::Br && term.op != Opcode::BrCond && term.op != Opcode::Ret) {
      out->push_back({{f.name, ""}, "block '" + b.label + "' lacks a terminator"});
      fa.cfg_ok = false;
      continue;
    }
    for (size_t k = 0; k + 1 < b.instrs.size(); ++k) {
      Opcode op = b.instrs[k].op;
      if (op == Opcode::Br || op == Opcode::BrCond || op == Opcode::Ret) {
        out->push_back({{f.name, ""}, "terminator not at end of block '" + b.label + "'"});
        fa.cfg_ok = false;
      }
    }
    for (const auto& lbl : term.labels) {
      auto it = fa.block_index.find(lbl);
      if (it == fa.block_index.end()) {
        out->push_back({{f.name, b.label}, "branch to unknown block '" + lbl + "'"});
        fa.cfg_ok = false;
      } else {
        fa.succs[i].push_back(it->second);
        fa.preds[it->second].push_back(i);
      }
    }
  }
  if (!fa.cfg_ok) return;
  // reachability from entry block 0
  std::vector<bool> reach(n, false);
  std::vector<int> stack{0};
  reach[0] = true;
  while (!stack.empty()) {
    int b = stack.back();
    stack.pop_back();
    for (int s : fa.succs[b])
      if (!reach[s]) {
        reach[s] = true;
        stack.push_back(s);
      }
  }
  for (int i = 0; i < n; ++i)
    if (!reach[i]) {
      out->push_back({{f.name, ""}, "unreachable block '" + f.blocks[i].label + "'"});
      fa.cfg_ok = false;
    }
  if (!fa.cfg_ok) return;
  // iterative dominator sets
  fa.dom.assign(n, std::vector<bool>(n, true));
  fa.dom[0].assign(n, false);
  fa.dom[0][0] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = 1; b < n; ++b) {
      std::vector<bool> nd(n, true);
      for (int p : fa.preds[b])
        for (int i = 0; i < n; ++i) nd[i] = nd[i] && fa.dom[p][i];
      nd[b] = true;
      if (nd != fa.dom[b]) {
        fa.dom[b] = std::move(nd);
        changed = true;
      }
    }
  }
}

Type value_type(const Instr& in) {
  switch (in.op) {
    case Opcode::FConst:
    case Opcode::FAdd:
    case Opcode::FSub:
    case Opcode::FMul:
    case Opcode::FDiv:
    case Opcode::FCall:
    case Opcode::Load:
    case Opcode::Phi:
      return in.type;
    case Opcode::FpExt:
      return Type::F64;
    case Opcode::FpTrunc:
      return Type::F32;
    default:
      return Type::I64;
  }
}

}  // namespace

std::vector<Violation> validate_program(const Program& p) {
  std::vector<Violation> out;
  std::set<std::string> fnames;
  for (const auto& f : p.functions)
    if (!fnames.insert(f.name).second)
      out.push_back({{f.name, ""}, "duplicate function name"});
  if (!fnames.count(p.entry))
    out.push_back({{p.entry, ""}, "entry function does not exist"});

  for (const auto& f : p.functions) {
    FnAnalysis fa(f);
    compute_cfg(fa, &out);

    // collect definitions
    bool defs_ok = true;
    for (const auto& prm : f.params) {
      if (prm.type.is_array && prm.type.length < 1)
        out.push_back({{f.name, prm.name}, "array parameter needs a positive length"});
      FnAnalysis::Def d;
      d.is_param = true;
      d.type = prm.type.elem;
      d.is_array = prm.type.is_array;
      d.array_len = prm.type.length;
      if (!fa.defs.emplace(prm.name, d).second) {
        out.push_back({{f.name, prm.name}, "duplicate definition (parameter)"});
        defs_ok = false;
      }
    }
    for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
      const Block& b = f.blocks[bi];
      for (size_t k = 0; k < b.instrs.size(); ++k) {
        const Instr& in = b.instrs[k];
        if (defines_value(in.op)) {
          if (in.dest.empty()) {
            out.push_back({{f.name, ""}, "missing destination register"});
            defs_ok = false;
            continue;
          }
          FnAnalysis::Def d;
          d.block = static_cast<int>(bi);
          d.pos = static_cast<int>(k);
          d.type = value_type(in);
          if (!fa.defs.emplace(in.dest, d).second) {
            out.push_back({{f.name, in.dest}, "duplicate definition (SSA violation)"});
            defs_ok = false;
          }
        }
        if (in.op == Opcode::Phi && k > 0 && b.instrs[k - 1].op != Opcode::Phi)
          out.push_back({{f.name, in.dest}, "phi not at block start"});
      }
    }
    if (!fa.cfg_ok || !defs_ok) continue;

    auto check_use = [&](const Operand& o, int ub, int up, const Instr& user,
                         std::optional<Type> want, bool phi_incoming, int pred_block) {
      if (o.is_imm) {
        if (want && *want != Type::I64)
          out.push_back({{f.name, user.dest},
                         "integer immediate where " + std::string(type_name(*want)) +
                             " value required"});
        return;
      }
      auto it = fa.defs.find(o.reg);
      if (it == fa.defs.end()) {
        out.push_back({{f.name, user.dest}, "use of undefined value %" + o.reg});
        return;
      }
      const auto& d = it->second;
      if (d.is_array) {
        out.push_back({{f.name, user.dest}, "array %" + o.reg + " used as scalar value"});
        return;
      }
      if (want && d.type != *want)
        out.push_back({{f.name, user.dest},
                       "operand %" + o.reg + " has type " + type_name(d.type) +
                           ", expected " + type_name(*want)});
      if (d.is_param) return;  // params dominate everything
      if (phi_incoming) {
        // def must dominate the end of the incoming predecessor block
        if (!(d.block == pred_block || fa.dominates(d.block, pred_block)))
          out.push_back({{f.name, user.dest},
                         "phi incoming %" + o.reg + " does not dominate predecessor"});
        return;
      }
      bool ok;
      if (d.block == ub)
        ok = d.pos < up;
      else
        ok = fa.dominates(d.block, ub);
      if (!ok)
        out.push_back(
            {{f.name, user.dest}, "use of %" + o.reg + " not dominated by its definition"});
    };

    auto array_of = [&](const Operand& o, const Instr& user,
                        Type elem) -> void {
      if (o.is_imm) {
        out.push_back({{f.name, user.dest}, "immediate used as array"});
        return;
      }
      auto it = fa.defs.find(o.reg);
      if (it == fa.defs.end() || !it->second.is_array) {
        out.push_back({{f.name, user.dest}, "%" + o.reg + " is not an array parameter"});
        return;
      }
      if (it->second.type != elem)
        out.push_back({{f.name, user.dest},
                       "array %" + o.reg + " has element type " +
                           type_name(it->second.type) + ", instruction expects " +
                           type_name(elem)});
    };

    for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
      const Block& b = f.blocks[bi];
      for (size_t k = 0; k < b.instrs.size(); ++k) {
        const Instr& in = b.instrs[k];
        int ub = static_cast<int>(bi), up = static_cast<int>(k);
        switch (in.op) {
          case Opcode::FConst:
          case Opcode::IConst:
            break;
          case Opcode::FAdd:
          case Opcode::FSub:
          case Opcode::FMul:
          case Opcode::FDiv:
          case Opcode::FCmp:
            check_use(in.args[0], ub, up, in, in.type, false, -1);
            check_use(in.args[1], ub, up, in, in.type, false, -1);
            break;
          case Opcode::FpExt:
            check_use(in.args[0], ub, up, in, Type::F32, false, -1);
            break;
          case Opcode::FpTrunc:
            check_use(in.args[0], ub, up, in, Type::F64, false, -1);
            break;
          case Opcode::FCall:
            check_use(in.args[0], ub, up, in, in.type, false, -1);
            break;
          case Opcode::IAdd:
          case Opcode::ISub:
          case Opcode::IMul:
          case Opcode::ICmp:
            check_use(in.args[0], ub, up, in, Type::I64, false, -1);
            check_use(in.args[1], ub, up, in, Type::I64, false, -1);
            break;
          case Opcode::Idx:
            for (int a = 0; a < 3; ++a) check_use(in.args[a], ub, up, in, Type::I64, false, -1);
            break;
          case Opcode::Load:
            array_of(in.args[0], in, in.type);
            check_use(in.args[1], ub, up, in, Type::I64, false, -1);
            break;
          case Opcode::Store:
            array_of(in.args[0], in, in.type);
            check_use(in.args[1], ub, up, in, Type::I64, false, -1);
            check_use(in.args[2], ub, up, in, in.type, false, -1);
            break;
          case Opcode::Br:
            break;
          case Opcode::BrCond:
            check_use(in.args[0], ub, up, in, Type::I64, false, -1);
            break;
          case Opcode::Phi: {
            // one incoming per predecessor, labels must match exactly
            std::set<int> incoming;
            if (in.args.size() != in.labels.size() ||
                in.args.size() != fa.preds[bi].size()) {
              out.push_back({{f.name, in.dest},
                             "phi incoming count does not match predecessor count"});
              break;
            }
            bool labels_ok = true;
            for (size_t a = 0; a < in.labels.size(); ++a) {
              auto it = fa.block_index.find(in.labels[a]);
              if (it == fa.block_index.end()) {
                out.push_back({{f.name, in.dest},
                               "phi incoming from unknown block '" + in.labels[a] + "'"});
                labels_ok = false;
                continue;
              }
              if (!incoming.insert(it->second).second) {
                out.push_back({{f.name, in.dest},
                               "duplicate phi incoming from '" + in.labels[a] + "'"});
                labels_ok = false;
              }
            }
            if (!labels_ok) break;
            std::set<int> want(fa.preds[bi].begin(), fa.preds[bi].end());
            if (incoming != want) {
              out.push_back(
                  {{f.name, in.dest}, "phi incomings do not match block predecessors"});
              break;
            }
            for (size_t a = 0; a < in.args.size(); ++a)
              check_use(in.args[a], ub, up, in, in.type, true,
                        fa.block_index.at(in.labels[a]));
            break;
          }
          case Opcode::Ret: {
            if (f.ret) {
              if (in.args.empty())
                out.push_back({{f.name, ""}, "ret without value in non-void function"});
              else
                check_use(in.args[0], ub, up, in, *f.ret, false, -1);
            } else if (!in.args.empty()) {
              out.push_back({{f.name, ""}, "ret with value in void function"});
            }
            break;
          }
        }
      }
    }
  }
  return out;
}

DefUseGraph def_use_graph(const Function& f) {
  DefUseGraph g;
  g.function = f.name;
  std::map<std::string, InstrId> def_of;
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs)
      if (defines_value(in.op)) {
        InstrId id{f.name, in.dest};
        g.nodes.push_back(id);
        g.uses[id];
        g.operands[id];
        def_of[in.dest] = id;
      }
  for (const auto& b : f.blocks)
    for (const auto& in : b.instrs) {
      if (!defines_value(in.op)) continue;
      InstrId user{f.name, in.dest};
      for (const auto& o : in.args) {
        if (o.is_imm) continue;
        auto it = def_of.find(o.reg);
        if (it == def_of.end()) continue;  // params are not graph nodes
        g.uses[it->second].push_back(user);
        g.operands[user].push_back(it->second);
      }
    }
  return g;
}

std::vector<DefUseGraph> def_use_graph(const Program& p) {
  std::vector<DefUseGraph> out;
  out.reserve(p.functions.size());
  for (const auto& f : p.functions) out.push_back(def_use_graph(f));
  return out;
}

InstrIndex index_program(const Program& p) {
  InstrIndex ix;
  for (const auto& f : p.functions) {
    ix.funcs[f.name] = &f;
    for (const auto& b : f.blocks)
      for (const auto& in : b.instrs)
        if (defines_value(in.op)) ix.by_id[{f.name, in.dest}] = &in;
  }
  return ix;
}

}  // namespace mixprec
