#include <doctest.h>

#include <nlohmann/json.hpp>

#include "mixprec/bench.hpp"
#include "mixprec/profiler.hpp"
#include "testutil.hpp"

using namespace mixprec;

namespace {

bool conserved(const ProfileEntry& e) {
  uint64_t hist = 0;
  for (uint64_t c : e.errratio_hist) hist += c;
  return e.exact + hist == e.total;
}

}  // namespace

TEST_CASE("an all-exact program profiles as fully exact") {
  Program p = parse_program(testutil::allexact_text());
  ProfileRun run = profile_program(p, testutil::allexact_input());
  REQUIRE(run.profile.entries.size() == 4);
  for (const auto& [id, e] : run.profile.entries) {
    CHECK(e.exact == e.total);
    CHECK(conserved(e));
  }
}

TEST_CASE("figure-7 cancellation instance is recorded on the subtraction") {
  Program p = parse_program(testutil::fig7_text());
  ExecInput in;
  in.arrays["a"] = {1.0};
  in.arrays["b"] = {1.0 - 0x1.0p-20};
  ProfileRun run = profile_program(p, in);
  const ProfileEntry& sub = run.profile.entries.at({"f", "r4"});
  CHECK(sub.max_cancelled == 20);
  CHECK(sub.total == 1);
  const ProfileEntry& mul = run.profile.entries.at({"f", "r3"});
  CHECK(mul.total == 1);
}

TEST_CASE("profile size is bound by the static instruction count") {
  size_t entries25 = 0, entries50 = 0;
  {
    Program p = lu_program(25);
    entries25 = profile_program(p, gen_matrix({25, 3, -1e6, 1e6})).profile.entries.size();
  }
  {
    Program p = lu_program(50);
    entries50 = profile_program(p, gen_matrix({50, 3, -1e6, 1e6})).profile.entries.size();
  }
  CHECK(entries25 == entries50);
  CHECK(entries25 == 7);  // cmul, csub, rmul, rsub, div, two fabs
}

TEST_CASE("conservation holds on the benchmarks") {
  {
    Program p = quad_program(8, 4);
    ProfileRun run = profile_program(p, quad_input(8, 4));
    for (const auto& [id, e] : run.profile.entries) CHECK(conserved(e));
  }
  {
    Program p = lu_program(16);
    ProfileRun run = profile_program(p, gen_matrix({16, 9, -1e6, 1e6}));
    for (const auto& [id, e] : run.profile.entries) CHECK(conserved(e));
  }
}

TEST_CASE("profiling is observation-only") {
  Program p = quad_program(8, 4);
  ExecInput in = quad_input(8, 4);
  ExecOutput plain = run_program(p, in);
  ProfileRun run = profile_program(p, in);
  CHECK(plain.result_id() == run.output.result_id());
}

TEST_CASE("merging split inputs equals the concatenated run") {
  Program p = lu_program(8);
  ExecInput in1 = gen_matrix({8, 1, -1e6, 1e6});
  ExecInput in2 = gen_matrix({8, 2, -1e6, 1e6});
  ProfileRun r1 = profile_program(p, in1);
  ProfileRun r2 = profile_program(p, in2);
  NumericalProfile merged = merge_profiles(r1.profile, r2.profile);
  // the concatenated run: one collector fed by both executions
  ProfileCollector sink;
  sink.profile.program_hash = program_hash(p);
  run_program(p, in1, PrecisionAssignment::declared(), &sink);
  run_program(p, in2, PrecisionAssignment::declared(), &sink);
  REQUIRE(merged.entries.size() == sink.profile.entries.size());
  for (const auto& [id, e] : merged.entries) {
    const ProfileEntry& w = sink.profile.entries.at(id);
    CHECK(e.total == w.total);
    CHECK(e.exact == w.exact);
    CHECK(e.errratio_hist == w.errratio_hist);
    CHECK(e.expdiff_hist == w.expdiff_hist);
    CHECK(e.max_cancelled == w.max_cancelled);
    CHECK(e.max_abs == w.max_abs);
    CHECK(e.min_abs_nonzero == w.min_abs_nonzero);
  }
  CHECK_THROWS_AS(merge_profiles(r1.profile, profile_program(lu_program(9),
                                                             gen_matrix({9, 1, -1e6, 1e6}))
                                                 .profile),
                  Error);
}

TEST_CASE("profile document round-trips losslessly") {
  Program p = quad_program(6, 3);
  ProfileRun run = profile_program(p, quad_input(6, 3));
  auto j = profile_to_json(run.profile);
  NumericalProfile back = profile_from_json(j);
  CHECK(back.program_hash == run.profile.program_hash);
  REQUIRE(back.entries.size() == run.profile.entries.size());
  for (const auto& [id, e] : run.profile.entries) {
    const ProfileEntry& w = back.entries.at(id);
    CHECK(e.opcode_string() == w.opcode_string());
    CHECK(e.total == w.total);
    CHECK(e.exact == w.exact);
    CHECK(e.errratio_hist == w.errratio_hist);
    CHECK(e.expdiff_hist == w.expdiff_hist);
    CHECK(e.max_cancelled == w.max_cancelled);
    CHECK(e.max_abs == w.max_abs);
    CHECK(e.min_abs_nonzero == w.min_abs_nonzero);
    CHECK(e.range_faults == w.range_faults);
  }
  // schema fields are present on every entry
  for (const auto& je : j.at("entries")) {
    for (const char* key : {"function", "dest", "opcode", "total", "exact", "errratio_hist",
                            "expdiff_hist", "max_cancel", "max_abs", "min_abs_nonzero",
                            "range_faults"})
      CHECK(je.contains(key));
  }
}

TEST_CASE("empty profile exports an empty document") {
  NumericalProfile np;
  np.program_hash = "0";
  auto j = profile_to_json(np);
  CHECK(j.at("entries").empty());
  CHECK(profile_from_json(j).entries.empty());
}

TEST_CASE("range faults flow into the profile, not exceptions") {
  // division by an exact zero pivot: the quotient is non-finite
  Program p = parse_program(R"(func @f(%A: arr<f32,2>) -> f32 {
entry:
  %x = load f32 %A, 0
  %y = load f32 %A, 1
  %d = fdiv f32 %x, %y
  ret %d
}
)");
  ExecInput in;
  in.arrays["A"] = {1.0, 0.0};
  ProfileRun run = profile_program(p, in);
  const ProfileEntry& e = run.profile.entries.at({"f", "d"});
  CHECK(e.range_faults == 1);
  CHECK(conserved(e));
  CHECK(std::isinf(*run.output.ret));
}

TEST_CASE("annotated graph covers the float instructions with labels") {
  Program p = parse_program(testutil::fig7_text());
  ProfileRun run = profile_program(p, testutil::fig7_input_cancel());
  CHECK(run.ddfg.nodes.size() == 4);  // two loads, mul, sub
  std::string dot = ddfg_to_dot(run.ddfg);
  CHECK(dot.find("f:r4") != std::string::npos);
  CHECK(dot.find("cancel=20") != std::string::npos);
  CHECK(dot.find("\"f:r3\" -> \"f:r4\"") != std::string::npos);
  CHECK(dot.find("exact=") != std::string::npos);
}
