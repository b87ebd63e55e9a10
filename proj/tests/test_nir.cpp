#include <doctest.h>

#include <random>
#include <set>

#include "mixprec/bench.hpp"
#include "mixprec/nir.hpp"
#include "testutil.hpp"

using namespace mixprec;

TEST_CASE("minimal program parses to one function, two instructions") {
  Program p = parse_program("func @f() -> f32 { entry: %c = fconst f32 1.0  ret %c }");
  REQUIRE(p.functions.size() == 1);
  CHECK(p.entry == "f");
  size_t n = 0;
  for (const auto& b : p.functions[0].blocks) n += b.instrs.size();
  CHECK(n == 2);
  CHECK(validate_program(p).empty());
}

TEST_CASE("figure-7 snippet parses with the expected instruction identities") {
  Program p = parse_program(testutil::fig7_text());
  CHECK(validate_program(p).empty());
  InstrIndex ix = index_program(p);
  for (const char* r : {"r1", "r2", "r3", "r4"}) CHECK(ix.by_id.count({"f", r}));
  CHECK(ix.by_id.at({"f", "r3"})->op == Opcode::FMul);
  CHECK(ix.by_id.at({"f", "r4"})->op == Opcode::FSub);
}

TEST_CASE("use before definition is a dominance violation") {
  const char* text = R"(func @f() -> f32 {
entry:
  %y = fadd f32 %x, %x
  %x = fconst f32 1.0
  ret %y
}
)";
  Program p = parse_program(text);
  auto v = validate_program(p);
  REQUIRE(!v.empty());
  bool found = false;
  for (const auto& viol : v)
    if (viol.message.find("not dominated") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_program("func @f() -> f32 { entry: %c = bogus f32 1.0 ret %c }"),
                  ParseError);
  CHECK_THROWS_AS(parse_program(""), ParseError);
  try {
    parse_program("func @f() -> f32 {\nentry:\n  %c = fconst f32 1.0\n"
                  "  %c = fconst f32 2.0\n  ret %c\n}\n");
    FAIL("duplicate definition must not parse");
  } catch (const ParseError& e) {
    CHECK(e.line == 4);
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }
}

TEST_CASE("mixed-width operands without casts are a type violation") {
  const char* text = R"(func @f() -> f64 {
entry:
  %a = fconst f32 1.0
  %b = fconst f64 2.0
  %c = fadd f64 %a, %b
  ret %c
}
)";
  auto v = validate_program(parse_program(text));
  REQUIRE(!v.empty());
  CHECK(v.front().where.dest == "c");
}

TEST_CASE("phi incoming set must match predecessors") {
  const char* text = R"(func @f() -> f32 {
entry:
  %x = fconst f32 1.0
  br exit
exit:
  %y = phi f32 [%x, entry], [%x, exit]
  ret %y
}
)";
  auto v = validate_program(parse_program(text));
  CHECK(!v.empty());
}

TEST_CASE("round trip: print then parse is structurally identical") {
  for (const char* text : {testutil::fig7_text(), testutil::diamond_text(),
                           testutil::allexact_text()}) {
    Program p = parse_program(text);
    Program q = parse_program(print_program(p));
    CHECK(p == q);
  }
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    Program p = parse_program(testutil::random_program(seed, 30));
    REQUIRE(validate_program(p).empty());
    Program q = parse_program(print_program(p));
    CHECK(p == q);
  }
  for (int64_t n : {2, 5, 11}) {
    Program p = lu_program(n);
    REQUIRE(validate_program(p).empty());
    CHECK(parse_program(print_program(p)) == p);
  }
  Program q20 = quad_program(4, 2);
  CHECK(parse_program(print_program(q20)) == q20);
}

TEST_CASE("fconst f32 literals are canonicalized at parse time") {
  Program p = parse_program(
      "func @f() -> f32 { entry: %c = fconst f32 0.30000000000000004 ret %c }");
  const Instr& in = p.functions[0].blocks[0].instrs[0];
  CHECK(in.fimm == static_cast<double>(0.3f));
}

TEST_CASE("def-use graph of the figure-7 snippet") {
  Program p = parse_program(testutil::fig7_text());
  DefUseGraph g = def_use_graph(p.functions[0]);
  auto has_edge = [&](const char* a, const char* b) {
    for (const auto& u : g.uses.at({"f", a}))
      if (u.dest == b) return true;
    return false;
  };
  CHECK(has_edge("r1", "r3"));
  CHECK(has_edge("r2", "r3"));
  CHECK(has_edge("r1", "r4"));
  CHECK(has_edge("r3", "r4"));
  CHECK_FALSE(has_edge("r2", "r4"));
}

TEST_CASE("single-instruction function gives one node and no edges") {
  Program p = parse_program("func @f() -> f32 { entry: %c = fconst f32 1.0 ret %c }");
  DefUseGraph g = def_use_graph(p.functions[0]);
  CHECK(g.nodes.size() == 1);
  CHECK(g.uses.at({"f", "c"}).empty());
}

TEST_CASE("LU def-use graph covers every float instruction") {
  Program p = lu_program(6);
  // independent count: scan the printed text for float-valued definitions
  std::string text = print_program(p);
  size_t expected = 0;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    for (const char* pat :
         {" = load f32", " = load f64", " = fconst", " = fadd", " = fsub", " = fmul",
          " = fdiv", " = fcall", " = fpext", " = fptrunc", " = phi f32", " = phi f64"})
      if (line.find(pat) != std::string::npos) {
        ++expected;
        break;
      }
  }
  DefUseGraph g = def_use_graph(p.functions[0]);
  InstrIndex ix = index_program(p);
  size_t floats = 0;
  for (const auto& id : g.nodes)
    if (defines_float(*ix.by_id.at(id))) ++floats;
  CHECK(floats == expected);
  CHECK(expected > 10);
}

TEST_CASE("instruction identities are unique program-wide") {
  for (const Program& p : {lu_program(5), quad_program(4, 2)}) {
    std::set<InstrId> seen;
    for (const auto& f : p.functions)
      for (const auto& b : f.blocks)
        for (const auto& in : b.instrs)
          if (defines_value(in.op)) CHECK(seen.insert({f.name, in.dest}).second);
  }
}

TEST_CASE("array parameters need a positive length") {
  Program p = parse_program("func @f(%A: arr<f32,0>) -> void { entry: ret }");
  CHECK(!validate_program(p).empty());
}

TEST_CASE("mutated source never crashes the parser") {
  std::string base = testutil::fig7_text();
  std::mt19937_64 rng(2024);
  int parsed = 0, rejected = 0;
  for (int i = 0; i < 3000; ++i) {
    std::string text = base;
    int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits; ++e) {
      size_t pos = rng() % text.size();
      switch (rng() % 3) {
        case 0: text[pos] = static_cast<char>(32 + rng() % 95); break;
        case 1: text.erase(pos, 1 + rng() % 3); break;
        case 2: text.insert(pos, 1, static_cast<char>(32 + rng() % 95)); break;
      }
    }
    try {
      Program p = parse_program(text);
      validate_program(p);
      ++parsed;
    } catch (const ParseError&) {
      ++rejected;
    } catch (const Error&) {
      ++rejected;
    }
  }
  CHECK(parsed + rejected == 3000);
  CHECK(rejected > 0);
}

TEST_CASE("program hash is stable and text-sensitive") {
  Program p = parse_program(testutil::fig7_text());
  CHECK(program_hash(p) == program_hash(p));
  Program q = parse_program(testutil::diamond_text());
  CHECK(program_hash(p) != program_hash(q));
}
