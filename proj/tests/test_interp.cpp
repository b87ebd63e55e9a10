#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mixprec/rng.hpp"

#include "mixprec/bench.hpp"
#include "mixprec/interp.hpp"
#include "mixprec/profiler.hpp"
#include "mixprec/rewrite.hpp"
#include "testutil.hpp"

using namespace mixprec;

namespace {

Program fig7() { return parse_program(testutil::fig7_text()); }

ExecInput fig7_in(double a, double b) {
  ExecInput in;
  in.arrays["a"] = {a};
  in.arrays["b"] = {b};
  return in;
}

}  // namespace

TEST_CASE("a - a*b with a=1.5, b=1.0 is exactly zero") {
  ExecOutput out = run_program(fig7(), fig7_in(1.5, 1.0));
  REQUIRE(out.ret.has_value());
  CHECK(*out.ret == 0.0);
  CHECK(out.ret_type == Type::F32);
}

TEST_CASE("runs are deterministic") {
  Program p = quad_program(4, 3);
  ExecInput in = quad_input(4, 3);
  ExecOutput a = run_program(p, in);
  ExecOutput b = run_program(p, in);
  CHECK(a.result_id() == b.result_id());
  CHECK(a.dynamic_instr_count == b.dynamic_instr_count);
  CHECK(a.op_counts == b.op_counts);
  uint64_t total = 0;
  for (const auto& [key, n] : a.op_counts) total += n;
  CHECK(total == a.dynamic_instr_count);
}

TEST_CASE("empty promoted set in mixed mode equals the uniform-f32 run") {
  Program p = quad_program(4, 2);
  ExecInput in = quad_input(4, 2);
  ExecOutput declared = run_program(p, in, PrecisionAssignment::declared());
  ExecOutput uniform = run_program(p, in, PrecisionAssignment::uniform_f32());
  CHECK(declared.result_id() == uniform.result_id());
}

TEST_CASE("mixed assignment on an un-rewritten program is rejected") {
  Program p = fig7();
  auto pa = PrecisionAssignment::mixed({{"f", "r3"}});
  CHECK_THROWS_WITH_AS(run_program(p, fig7_in(1.0, 1.0), pa),
                       doctest::Contains("missing casts"), Error);
}

TEST_CASE("rewritten program runs the promoted ops at f64") {
  Program p = fig7();
  InstructionChangeSet ics = InstructionChangeSet::from_set({{"f", "r3"}, {"f", "r4"}});
  Program mixed = rewrite_program(p, ics);
  ExecOutput out = run_program(mixed, fig7_in(1.2, 0.37),
                               PrecisionAssignment::mixed(ics.as_set()));
  CHECK(out.op_counts.at({Opcode::FMul, Type::F64}) == 1);
  CHECK(out.op_counts.at({Opcode::FSub, Type::F64}) == 1);
  CHECK(out.op_counts.at({Opcode::FpExt, Type::F64}) == 2);
  CHECK(out.op_counts.count({Opcode::FMul, Type::F32}) == 0);
}

TEST_CASE("uniform f64 widens storage and the return value") {
  Program p = quad_program(4, 2);
  ExecInput in = quad_input(4, 2);
  ExecOutput out = run_program(p, in, PrecisionAssignment::uniform_f64());
  CHECK(out.ret_type == Type::F64);
  CHECK(out.arrays.at("X").elem == Type::F64);
  ExecOutput narrow = run_program(p, in, PrecisionAssignment::uniform_f32());
  CHECK(narrow.ret_type == Type::F32);
  CHECK(narrow.arrays.at("X").elem == Type::F32);
  CHECK(*out.ret != *narrow.ret);  // precision must actually differ
}

TEST_CASE("single vs double quadrature gap has the expected scale") {
  Program p = quad_program(20, 50);
  ExecInput in = quad_input(20, 50);
  double lo = *run_program(p, in, PrecisionAssignment::uniform_f32()).ret;
  double hi = *run_program(p, in, PrecisionAssignment::uniform_f64()).ret;
  double gap = std::fabs(lo - hi);
  CHECK(gap > 1e-4);
  CHECK(gap < 3e-2);
}

TEST_CASE("LU at uniform f64 is bit-identical to the host reference") {
  for (int64_t n : {4, 20}) {
    Program p = lu_program(n);
    ExecInput in = gen_matrix({n, 42, -1e6, 1e6});
    ExecOutput out = run_program(p, in, PrecisionAssignment::uniform_f64());
    std::vector<double> want = host_lu(in.arrays.at("A"), n);
    const auto& got = out.arrays.at("A").data;
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) CHECK(got[i] == want[i]);
  }
}

TEST_CASE("step limit aborts with a diagnostic") {
  Program p = parse_program("func @spin() -> void { entry: br next next: br next }");
  REQUIRE(validate_program(p).empty());
  ExecInput in;
  in.step_limit = 1000;
  CHECK_THROWS_WITH_AS(run_program(p, in), doctest::Contains("step limit"), Error);
}

TEST_CASE("out-of-bounds access names the instruction") {
  Program p = parse_program(R"(func @f(%A: arr<f32,4>) -> f32 {
entry:
  %v = load f32 %A, 9
  ret %v
}
)");
  ExecInput in;
  in.arrays["A"] = {1, 2, 3, 4};
  CHECK_THROWS_WITH_AS(run_program(p, in), doctest::Contains("@f:%v"), Error);
}

TEST_CASE("unbound parameters are reported") {
  Program p = fig7();
  ExecInput in;
  in.arrays["a"] = {1.0};
  CHECK_THROWS_WITH_AS(run_program(p, in), doctest::Contains("%b"), Error);
  in.arrays["b"] = {1.0, 2.0};  // wrong length
  CHECK_THROWS_WITH_AS(run_program(p, in), doctest::Contains("length"), Error);
}

TEST_CASE("attaching a sink never changes the output") {
  Program p = lu_program(12);
  ExecInput in = gen_matrix({12, 7, -1e6, 1e6});
  ExecOutput plain = run_program(p, in);
  ProfileCollector sink;
  ExecOutput profiled = run_program(p, in, PrecisionAssignment::declared(), &sink);
  CHECK(plain.result_id() == profiled.result_id());
  CHECK(!sink.profile.entries.empty());
}

TEST_CASE("manifest round trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mixprec_manifest_test";
  fs::create_directories(dir);
  ExecInput in = quad_input(4, 2);
  in.int_scalars["n"] = 8;
  write_manifest((dir / "m.manifest").string(), in, {{"X", Type::F32}, {"W", Type::F32}});
  ExecInput back = load_manifest((dir / "m.manifest").string());
  CHECK(back.int_scalars.at("n") == 8);
  REQUIRE(back.arrays.at("X").size() == in.arrays.at("X").size());
  for (size_t i = 0; i < in.arrays.at("X").size(); ++i) {
    CHECK(static_cast<float>(back.arrays.at("X")[i]) ==
          static_cast<float>(in.arrays.at("X")[i]));
  }
  // generator spec: values come from the normative stream
  {
    std::ofstream g(dir / "g.manifest");
    g << "array=A elem=f32 length=6 gen=uniform low=-1e6 high=1e6 seed=42\n";
  }
  ExecInput gen = load_manifest((dir / "g.manifest").string());
  SplitMix64 rng(42);
  for (size_t i = 0; i < 6; ++i)
    CHECK(gen.arrays.at("A")[i] ==
          static_cast<double>(static_cast<float>(rng.next_uniform(-1e6, 1e6))));
  fs::remove_all(dir);
}
