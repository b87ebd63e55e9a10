#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "mixprec/sweep.hpp"
#include "testutil.hpp"

using namespace mixprec;

TEST_CASE("grid enumeration sizes") {
  CHECK(enumerate_grid(default_grid()).size() == 279936);  // 6^7
  CHECK(enumerate_grid(desk_grid(3)).size() == 2187);      // 3^7
  CHECK(enumerate_grid(desk_grid(1)).size() == 1);
  GridSpec g3 = desk_grid(3);
  CHECK(g3.samples[0] == std::vector<double>{1, 10, 75});
  CHECK(g3.samples[4] == std::vector<double>{4, 12, 23});
}

TEST_CASE("grid config files") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "mixprec_grid_test";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "g.cfg");
    out << "# two values each\n";
    out << "t1=1,75\nt2=3,100\nt3=1,75\nt4=8,28\nt5=4,23\nt6=1e30,4e37\nt7=1e-38,1e-29\n";
  }
  GridSpec g = load_grid((dir / "g.cfg").string());
  CHECK(g.size() == 128);
  CHECK(g.samples[1] == std::vector<double>{3, 100});
  fs::remove_all(dir);
}

TEST_CASE("figure-8 prime examples") {
  // six-component examples over (t1..t6), t7 held equal
  auto vec = [](std::array<double, 6> v) {
    ThresholdVector t;
    t.t1 = v[0];
    t.t2 = v[1];
    t.t3 = v[2];
    t.t4 = static_cast<int>(v[3]);
    t.t5 = static_cast<int>(v[4]);
    t.t6 = v[5];
    t.t7 = 1e-38;
    return t;
  };
  ThresholdVector base = vec({1, 2, 3, 4, 5, 6});
  SUBCASE("example 1: one larger component, the larger vector is redundant") {
    auto primes = prime_vectors({base, vec({1, 2, 3, 4, 5, 7})});
    REQUIRE(primes.size() == 1);
    CHECK(primes[0] == base);
  }
  SUBCASE("example 2: two larger components, still one prime") {
    auto primes = prime_vectors({base, vec({2, 2, 3, 4, 5, 7})});
    REQUIRE(primes.size() == 1);
    CHECK(primes[0] == base);
  }
  SUBCASE("example 3: opposite directions, both prime") {
    auto primes = prime_vectors({base, vec({2, 2, 3, 4, 5, 5})});
    CHECK(primes.size() == 2);
  }
}

TEST_CASE("a singleton set is its own prime") {
  ThresholdVector t = parse_threshold_vector("t1=5,t2=25,t3=1,t4=16,t5=8,t6=1e30,t7=1e-38");
  auto primes = prime_vectors({t});
  REQUIRE(primes.size() == 1);
  CHECK(primes[0] == t);
}

TEST_CASE("lattice and pairwise prime computations agree") {
  GridSpec g = desk_grid(3);
  std::vector<ThresholdVector> grid = enumerate_grid(g);
  // a deterministic pseudo-random subset plays the role of an R-set
  std::vector<ThresholdVector> rset;
  uint64_t h = 1;
  for (size_t i = 0; i < grid.size(); ++i) {
    h = h * 6364136223846793005ull + 1442695040888963407ull;
    if ((h >> 33) % 3 == 0) rset.push_back(grid[i]);
  }
  REQUIRE(rset.size() > 100);
  auto slow = prime_vectors(rset);  // pairwise
  auto fast = prime_vectors(rset, &g);
  auto key = [](const ThresholdVector& t) { return t.to_string(); };
  std::set<std::string> a, b;
  for (const auto& t : slow) a.insert(key(t));
  for (const auto& t : fast) b.insert(key(t));
  CHECK(a == b);
  // every redundant vector has a dominating prime in the same set
  for (const auto& v : rset) {
    if (a.count(key(v))) continue;
    bool dominated_by_prime = false;
    for (const auto& p : slow)
      if (!(p == v) && dominates(p, v)) {
        dominated_by_prime = true;
        break;
      }
    CHECK(dominated_by_prime);
  }
}

TEST_CASE("cost model") {
  std::map<std::pair<Opcode, Type>, uint64_t> counts;
  SUBCASE("all-f32 vs all-f64 with no casts is exactly 2x") {
    counts[{Opcode::FAdd, Type::F32}] = 1000;
    counts[{Opcode::FMul, Type::F32}] = 500;
    double c32 = cost_estimate(counts, CostModel::vec(256));
    std::map<std::pair<Opcode, Type>, uint64_t> counts64;
    counts64[{Opcode::FAdd, Type::F64}] = 1000;
    counts64[{Opcode::FMul, Type::F64}] = 500;
    double c64 = cost_estimate(counts64, CostModel::vec(256));
    CHECK(c64 == 2.0 * c32);
    // scalar model: identical op mixes cost the same at either width
    CHECK(cost_estimate(counts, CostModel::scalar()) ==
          cost_estimate(counts64, CostModel::scalar()));
  }
  SUBCASE("scalar model: any cast-bearing variant costs at least uniform f64") {
    counts[{Opcode::FAdd, Type::F64}] = 900;
    counts[{Opcode::FAdd, Type::F32}] = 100;
    counts[{Opcode::FpExt, Type::F64}] = 50;
    std::map<std::pair<Opcode, Type>, uint64_t> uniform;
    uniform[{Opcode::FAdd, Type::F64}] = 1000;
    CHECK(cost_estimate(counts, CostModel::scalar()) >=
          cost_estimate(uniform, CostModel::scalar()));
  }
  SUBCASE("vector model: a low-cast mixed variant lands strictly between") {
    // 40-op chain with a 21-op promoted interior and two boundary casts
    std::map<std::pair<Opcode, Type>, uint64_t> mixed, f32, f64;
    f32[{Opcode::FAdd, Type::F32}] = 40;
    f64[{Opcode::FAdd, Type::F64}] = 40;
    mixed[{Opcode::FAdd, Type::F32}] = 19;
    mixed[{Opcode::FAdd, Type::F64}] = 21;
    mixed[{Opcode::FpExt, Type::F64}] = 1;
    mixed[{Opcode::FpTrunc, Type::F32}] = 1;
    CostModel vm = CostModel::vec(256);
    CHECK(cost_estimate(f32, vm) < cost_estimate(mixed, vm));
    CHECK(cost_estimate(mixed, vm) < cost_estimate(f64, vm));
  }
  SUBCASE("loads, stores, and integer ops are outside the model") {
    counts[{Opcode::Load, Type::F32}] = 1000;
    counts[{Opcode::IAdd, Type::I64}] = 1000;
    CHECK(cost_estimate(counts, CostModel::scalar()) == 0.0);
  }
}

TEST_CASE("all-exact program sweeps to a single maximal result set") {
  Program p = parse_program(testutil::allexact_text());
  std::vector<ThresholdVector> grid = enumerate_grid(desk_grid(3));
  SweepOptions opts;
  opts.metric = Metric::AbsError;
  GridSpec axes = desk_grid(3);
  SweepResult res =
      run_sweep(p, testutil::allexact_input(), testutil::allexact_input(), grid, opts, &axes);
  REQUIRE(res.report.results.size() == 1);
  CHECK(res.report.results[0].vector_count == grid.size());
  CHECK(res.report.results[0].accuracy == 0.0);
  for (const auto& rec : res.records) CHECK(rec.ics_id == InstructionChangeSet{}.id());
}

TEST_CASE("sweep bookkeeping on the quadrature benchmark") {
  Program p = quad_program(10, 6);
  ExecInput in = quad_input(10, 6);
  GridSpec axes = desk_grid(3);
  std::vector<ThresholdVector> grid = enumerate_grid(axes);
  SweepOptions opts;
  opts.metric = Metric::AbsError;
  opts.jobs = 2;
  SweepResult res = run_sweep(p, in, in, grid, opts, &axes);
  REQUIRE(res.records.size() == grid.size());

  uint64_t covered = 0;
  for (const auto& rg : res.report.results) covered += rg.vector_count;
  CHECK(covered == grid.size());

  // IC refines R: every ICS maps into exactly one result set
  std::map<std::string, std::set<std::string>> results_of_ics;
  for (const auto& rec : res.records) results_of_ics[rec.ics_id].insert(rec.result_id);
  for (const auto& [ics, rs] : results_of_ics) CHECK(rs.size() == 1);

  for (const auto& rg : res.report.results) {
    CHECK(!rg.primes.empty());
    CHECK(rg.promoted_min <= rg.promoted_mean);
    CHECK(rg.promoted_mean <= rg.promoted_max);
  }

  // identical ICS implies identical result
  std::map<std::string, std::string> result_of;
  for (const auto& rec : res.records) {
    auto [it, fresh] = result_of.emplace(rec.ics_id, rec.result_id);
    if (!fresh) CHECK(it->second == rec.result_id);
  }

  // IC stays finer than R in the report: several change sets reach the
  // same result without being collapsed
  uint64_t ic_covered = 0;
  for (const auto& ig : res.report.ic_sets) ic_covered += ig.vector_count;
  CHECK(ic_covered == grid.size());
  CHECK(res.report.ic_sets.size() >= res.report.results.size());
  bool some_result_has_multiple_ics = false;
  for (const auto& rg : res.report.results)
    if (rg.ics_ids.size() > 1) some_result_has_multiple_ics = true;
  CHECK(some_result_has_multiple_ics);
}

TEST_CASE("deduplicated sweep equals the brute-force sweep record for record") {
  Program p = quad_program(8, 4);
  ExecInput in = quad_input(8, 4);
  GridSpec axes = desk_grid(2);
  std::vector<ThresholdVector> grid = enumerate_grid(axes);
  REQUIRE(grid.size() == 128);
  SweepOptions dedup;
  dedup.metric = Metric::AbsError;
  SweepOptions brute = dedup;
  brute.dedupe = false;
  SweepResult a = run_sweep(p, in, in, grid, dedup, &axes);
  SweepResult b = run_sweep(p, in, in, grid, brute, &axes);
  REQUIRE(a.records.size() == b.records.size());
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].t == b.records[i].t);
    CHECK(a.records[i].ics_id == b.records[i].ics_id);
    CHECK(a.records[i].result_id == b.records[i].result_id);
    CHECK(a.records[i].accuracy == b.records[i].accuracy);
    CHECK(a.records[i].promoted_fraction == b.records[i].promoted_fraction);
    CHECK(a.records[i].scalar_cost == b.records[i].scalar_cost);
    CHECK(a.records[i].vector_cost == b.records[i].vector_cost);
  }
}

TEST_CASE("sweeps are independent of the parallelism degree") {
  Program p = quad_program(8, 4);
  ExecInput in = quad_input(8, 4);
  GridSpec axes = desk_grid(2);
  std::vector<ThresholdVector> grid = enumerate_grid(axes);
  SweepOptions one;
  one.metric = Metric::AbsError;
  SweepOptions four = one;
  four.jobs = 4;
  SweepResult a = run_sweep(p, in, in, grid, one, &axes);
  SweepResult b = run_sweep(p, in, in, grid, four, &axes);
  for (size_t i = 0; i < a.records.size(); ++i)
    CHECK(a.records[i].result_id == b.records[i].result_id);
}

TEST_CASE("distinct change sets may share a result") {
  // an unused inexact division is promotable but cannot affect the output
  Program p = parse_program(R"(func @f(%A: arr<f32,2>) -> f32 {
entry:
  %x = load f32 %A, 0
  %y = load f32 %A, 1
  %dead = fdiv f32 %x, %y
  %s = fadd f32 %x, %y
  ret %s
}
)");
  ExecInput in;
  in.arrays["A"] = {1.0, 3.0};
  ExecOutput base = run_program(p, in);
  Program promoted = rewrite_program(p, InstructionChangeSet::from_set({{"f", "dead"}}));
  ExecOutput out = run_program(promoted, in);
  CHECK(out.result_id() == base.result_id());
}

TEST_CASE("csv export shape") {
  SweepRecord r;
  r.t = parse_threshold_vector("t1=5,t2=25,t3=1,t4=16,t5=8,t6=1e30,t7=1e-38");
  r.ics_id = "abc";
  r.result_id = "def";
  r.accuracy = 0.5;
  std::string csv = sweep_csv({r});
  CHECK(csv.find("t1,t2,t3,t4,t5,t6,t7,ics_id,result_id,accuracy,promoted_fraction,"
                 "scalar_cost,vector_cost") == 0);
  CHECK(csv.find("abc,def") != std::string::npos);
}
