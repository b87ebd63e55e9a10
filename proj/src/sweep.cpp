#include "mixprec/sweep.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace mixprec {

using nlohmann::json;

size_t GridSpec::size() const {
  size_t n = 1;
  for (const auto& s : samples) n *= s.size();
  return n;
}

GridSpec default_grid() {
  GridSpec g;
  g.samples[0] = {1, 5, 10, 25, 50, 75};          // t1 %
  g.samples[1] = {3, 6, 12, 25, 50, 100};         // t2 %
  g.samples[2] = {1, 5, 10, 25, 50, 75};          // t3 %
  g.samples[3] = {8, 12, 16, 20, 24, 28};         // t4 bits
  g.samples[4] = {4, 8, 12, 16, 20, 23};          // t5 bits
  g.samples[5] = {0x1p100, 0x1p105, 0x1p110, 0x1p115, 0x1p120, 0x1p125};  // t6
  g.samples[6] = {0x1p-126, 0x1p-120, 0x1p-114, 0x1p-108, 0x1p-102, 0x1p-96};  // t7
  return g;
}

GridSpec desk_grid(int k) {
  if (k < 1 || k > 6) throw Error("desk_grid takes 1..6 values per component");
  GridSpec full = default_grid();
  if (k == 6) return full;
  GridSpec g;
  for (int c = 0; c < 7; ++c) {
    for (int i = 0; i < k; ++i) {
      int ix = k == 1 ? 0 : i * 5 / (k - 1);
      g.samples[c].push_back(full.samples[c][ix]);
    }
  }
  return g;
}

GridSpec load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open grid config " + path);
  GridSpec g;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos || line[a] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos || line[a] != 't')
      throw Error(path + ":" + std::to_string(lineno) + ": expected tN=v1,v2,...");
    int c = line[a + 1] - '1';
    if (c < 0 || c > 6) throw Error(path + ":" + std::to_string(lineno) + ": bad component");
    std::istringstream vs(line.substr(eq + 1));
    std::string tok;
    while (std::getline(vs, tok, ',')) g.samples[c].push_back(std::strtod(tok.c_str(), nullptr));
    std::sort(g.samples[c].begin(), g.samples[c].end());
  }
  for (int c = 0; c < 7; ++c)
    if (g.samples[c].empty())
      throw Error(path + ": component t" + std::to_string(c + 1) + " has no samples");
  return g;
}

std::vector<ThresholdVector> enumerate_grid(const GridSpec& g) {
  std::vector<ThresholdVector> out;
  out.reserve(g.size());
  for (double v1 : g.samples[0])
    for (double v2 : g.samples[1])
      for (double v3 : g.samples[2])
        for (double v4 : g.samples[3])
          for (double v5 : g.samples[4])
            for (double v6 : g.samples[5])
              for (double v7 : g.samples[6]) {
                ThresholdVector t;
                t.t1 = v1;
                t.t2 = v2;
                t.t3 = v3;
                t.t4 = static_cast<int>(v4);
                t.t5 = static_cast<int>(v5);
                t.t6 = v6;
                t.t7 = v7;
                out.push_back(t);
              }
  return out;
}

double cost_estimate(const std::map<std::pair<Opcode, Type>, uint64_t>& counts,
                     const CostModel& model) {
  double cost = 0;
  double w = model.width_bits;
  double shuffle = model.shuffle < 0 ? 64.0 / w : model.shuffle;
  for (const auto& [key, n] : counts) {
    auto [op, ty] = key;
    bool arith = op == Opcode::FAdd || op == Opcode::FSub || op == Opcode::FMul ||
                 op == Opcode::FDiv || op == Opcode::FCall;
    bool cast = op == Opcode::FpExt || op == Opcode::FpTrunc;
    if (!arith && !cast) continue;
    if (model.kind == CostModel::Kind::Scalar) {
      cost += static_cast<double>(n);
    } else if (cast) {
      cost += static_cast<double>(n) * (64.0 / w + shuffle);
    } else {
      cost += static_cast<double>(n) * (ty == Type::F64 ? 64.0 : 32.0) / w;
    }
  }
  return cost;
}

// ---------------------------------------------------------------------------
// prime vectors
// ---------------------------------------------------------------------------

namespace {

// index of each component value in the grid axes, promoting direction first
struct GridIndexer {
  std::array<std::vector<double>, 7> axes;  // sorted in promoting order
  std::array<int, 7> dims;

  explicit GridIndexer(const GridSpec& g) {
    auto dir = monotone_direction();
    for (int c = 0; c < 7; ++c) {
      axes[c] = g.samples[c];
      std::sort(axes[c].begin(), axes[c].end());
      if (dir[c] < 0)
        ;  // ascending = promoting..less promoting for decreasing components
      else
        std::reverse(axes[c].begin(), axes[c].end());
      dims[c] = static_cast<int>(axes[c].size());
    }
  }

  // nullopt when the vector is off the grid
  std::optional<std::array<int, 7>> index_of(const ThresholdVector& t) const {
    std::array<int, 7> ix{};
    for (int c = 0; c < 7; ++c) {
      double v = t.comp(c);
      auto it = std::find(axes[c].begin(), axes[c].end(), v);
      if (it == axes[c].end()) return std::nullopt;
      ix[c] = static_cast<int>(it - axes[c].begin());
    }
    return ix;
  }
};

std::vector<ThresholdVector> primes_pairwise(const std::vector<ThresholdVector>& rset) {
  std::vector<ThresholdVector> primes;
  for (size_t i = 0; i < rset.size(); ++i) {
    bool redundant = false;
    for (size_t j = 0; j < rset.size() && !redundant; ++j) {
      if (i == j) continue;
      if (rset[j] == rset[i]) continue;
      if (dominates(rset[j], rset[i])) redundant = true;
    }
    if (!redundant) primes.push_back(rset[i]);
  }
  return primes;
}

std::vector<ThresholdVector> primes_lattice(const std::vector<ThresholdVector>& rset,
                                            const GridIndexer& gi) {
  size_t total = 1;
  for (int c = 0; c < 7; ++c) total *= static_cast<size_t>(gi.dims[c]);
  std::array<size_t, 7> stride{};
  size_t s = 1;
  for (int c = 6; c >= 0; --c) {
    stride[c] = s;
    s *= static_cast<size_t>(gi.dims[c]);
  }
  std::vector<uint8_t> in_set(total, 0), covered(total, 0);
  std::vector<std::array<int, 7>> ixs(rset.size());
  for (size_t i = 0; i < rset.size(); ++i) {
    auto ix = gi.index_of(rset[i]);
    if (!ix) return primes_pairwise(rset);
    ixs[i] = *ix;
    size_t flat = 0;
    for (int c = 0; c < 7; ++c) flat += stride[c] * static_cast<size_t>((*ix)[c]);
    in_set[flat] = 1;
  }
  // covered[p] = some member strictly dominates p (lies below in the lattice)
  std::array<int, 7> ix{};
  for (size_t flat = 0; flat < total; ++flat) {
    size_t rem = flat;
    for (int c = 0; c < 7; ++c) {
      ix[c] = static_cast<int>(rem / stride[c]);
      rem %= stride[c];
    }
    uint8_t cov = 0;
    for (int c = 0; c < 7 && !cov; ++c) {
      if (ix[c] == 0) continue;
      size_t prev = flat - stride[c];
      if (in_set[prev] || covered[prev]) cov = 1;
    }
    covered[flat] = cov;
  }
  std::vector<ThresholdVector> primes;
  for (size_t i = 0; i < rset.size(); ++i) {
    size_t flat = 0;
    for (int c = 0; c < 7; ++c) flat += stride[c] * static_cast<size_t>(ixs[i][c]);
    if (!covered[flat]) primes.push_back(rset[i]);
  }
  return primes;
}

}  // namespace

std::vector<ThresholdVector> prime_vectors(const std::vector<ThresholdVector>& rset,
                                           const GridSpec* axes) {
  if (rset.size() <= 1) return rset;
  if (axes && rset.size() > 64) return primes_lattice(rset, GridIndexer(*axes));
  return primes_pairwise(rset);
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

namespace {

struct VariantEval {
  std::string ics_id;
  std::string result_id;
  double accuracy = 0;
  double promoted_fraction = 0;
  double scalar_cost = 0;
  double vector_cost = 0;
};

}  // namespace

SweepResult run_sweep(const Program& p, const ExecInput& train, const ExecInput& eval,
                      const std::vector<ThresholdVector>& grid, const SweepOptions& opts,
                      const GridSpec* axes) {
  auto violations = validate_program(p);
  if (!violations.empty())
    throw Error("sweep input program does not validate: " + violations.front().message);

  SweepResult res;
  ProfileRun train_run = profile_program(p, train, opts.kernel);
  res.profile = train_run.profile;

  uint64_t float_ops = 0;
  for (const auto& f : p.functions)
    for (const auto& b : f.blocks)
      for (const auto& in : b.instrs)
        if (is_promotable(in.op)) ++float_ops;

  ExecOutput base64 = run_program(p, eval, PrecisionAssignment::uniform_f64(), nullptr,
                                  opts.kernel);
  ExecOutput base32 = run_program(p, eval, PrecisionAssignment::uniform_f32(), nullptr,
                                  opts.kernel);
  res.double_result_id = base64.result_id();
  res.single_result_id = base32.result_id();
  res.single_error = accuracy(base32, base64, opts.metric);

  // classify every vector; group by canonical ICS
  std::map<std::string, InstructionChangeSet> unique;  // keyed by ics id
  std::vector<std::string> vec_ics_id(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    Classification cl = classify_profile(res.profile, grid[i]);
    InstructionChangeSet ics = compute_ics(cl, p);
    std::string id = ics.id();
    vec_ics_id[i] = id;
    unique.emplace(id, std::move(ics));
  }

  // evaluate: one run per unique ICS, or per vector when deduplication is
  // disabled (the brute-force cross-check)
  std::map<std::string, VariantEval> evals;
  auto evaluate = [&](const InstructionChangeSet& ics) {
    VariantEval ev;
    ev.ics_id = ics.id();
    Program variant = rewrite_program(p, ics);
    ExecOutput out = run_program(variant, eval, PrecisionAssignment::declared(), nullptr,
                                 opts.kernel);
    ev.result_id = out.result_id();
    ev.accuracy = accuracy(out, base64, opts.metric);
    ev.promoted_fraction =
        float_ops ? static_cast<double>(ics.promoted.size()) / static_cast<double>(float_ops)
                  : 0.0;
    ev.scalar_cost = cost_estimate(out.op_counts, CostModel::scalar());
    ev.vector_cost = cost_estimate(out.op_counts, opts.vector_model);
    return ev;
  };

  if (opts.dedupe) {
    std::vector<const InstructionChangeSet*> work;
    work.reserve(unique.size());
    for (auto& [id, ics] : unique) work.push_back(&ics);
    std::vector<VariantEval> results(work.size());
    int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || work.size() <= 1) {
      for (size_t i = 0; i < work.size(); ++i) results[i] = evaluate(*work[i]);
    } else {
      std::atomic<size_t> next{0};
      auto worker = [&]() {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= work.size()) break;
          results[i] = evaluate(*work[i]);
        }
      };
      std::vector<std::thread> pool;
      for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    for (size_t i = 0; i < work.size(); ++i) evals[results[i].ics_id] = results[i];
    res.records.resize(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
      const VariantEval& ev = evals.at(vec_ics_id[i]);
      res.records[i] = {grid[i],          ev.ics_id,          ev.result_id, ev.accuracy,
                        ev.promoted_fraction, ev.scalar_cost, ev.vector_cost};
    }
  } else {
    res.records.resize(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
      Classification cl = classify_profile(res.profile, grid[i]);
      InstructionChangeSet ics = compute_ics(cl, p);
      VariantEval ev = evaluate(ics);
      res.records[i] = {grid[i],          ev.ics_id,          ev.result_id, ev.accuracy,
                        ev.promoted_fraction, ev.scalar_cost, ev.vector_cost};
      evals[ev.ics_id] = ev;
    }
  }

  // equivalence report
  EquivalenceReport& rep = res.report;
  rep.grid_size = grid.size();
  std::map<std::string, ResultGroup> rgroups;
  std::map<std::string, ICGroup> igroups;
  std::map<std::string, std::vector<ThresholdVector>> rvectors;
  std::map<std::string, std::vector<double>> rfractions;
  std::map<std::string, std::set<std::string>> rics;
  for (const auto& rec : res.records) {
    auto& rg = rgroups[rec.result_id];
    rg.result_id = rec.result_id;
    rg.accuracy = rec.accuracy;
    rg.vector_count += 1;
    rvectors[rec.result_id].push_back(rec.t);
    rfractions[rec.result_id].push_back(rec.promoted_fraction);
    rics[rec.result_id].insert(rec.ics_id);
    auto& ig = igroups[rec.ics_id];
    if (ig.vector_count == 0) {
      ig.ics_id = rec.ics_id;
      ig.result_id = rec.result_id;
      ig.ics_size = unique.count(rec.ics_id) ? unique.at(rec.ics_id).promoted.size() : 0;
      ig.promoted_fraction = rec.promoted_fraction;
    }
    ig.vector_count += 1;
  }
  for (auto& [rid, rg] : rgroups) {
    const auto& fr = rfractions[rid];
    rg.promoted_min = *std::min_element(fr.begin(), fr.end());
    rg.promoted_max = *std::max_element(fr.begin(), fr.end());
    rg.promoted_mean = std::accumulate(fr.begin(), fr.end(), 0.0) / fr.size();
    rg.ics_ids.assign(rics[rid].begin(), rics[rid].end());
    if (opts.compute_primes) rg.primes = prime_vectors(rvectors[rid], axes);
    rep.results.push_back(rg);
  }
  // worst accuracy first, stable on result id
  std::sort(rep.results.begin(), rep.results.end(), [](const auto& a, const auto& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.result_id < b.result_id;
  });
  for (auto& [iid, ig] : igroups) rep.ic_sets.push_back(ig);
  std::sort(rep.ic_sets.begin(), rep.ic_sets.end(), [](const auto& a, const auto& b) {
    if (a.vector_count != b.vector_count) return a.vector_count > b.vector_count;
    return a.ics_id < b.ics_id;
  });
  return res;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  os << "t1,t2,t3,t4,t5,t6,t7,ics_id,result_id,accuracy,promoted_fraction,scalar_cost,"
        "vector_cost\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf,
                  "%.9g,%.9g,%.9g,%d,%d,%.9g,%.9g,%s,%s,%.17g,%.9g,%.17g,%.17g\n", r.t.t1,
                  r.t.t2, r.t.t3, r.t.t4, r.t.t5, r.t.t6, r.t.t7, r.ics_id.c_str(),
                  r.result_id.c_str(), r.accuracy, r.promoted_fraction, r.scalar_cost,
                  r.vector_cost);
    os << buf;
  }
  return os.str();
}

json report_to_json(const EquivalenceReport& rep) {
  json j;
  j["grid_size"] = rep.grid_size;
  json results = json::array();
  for (const auto& rg : rep.results) {
    json jr;
    jr["result_id"] = rg.result_id;
    jr["accuracy"] = rg.accuracy;
    jr["vector_count"] = rg.vector_count;
    jr["ics_ids"] = rg.ics_ids;
    jr["prime_count"] = rg.primes.size();
    json primes = json::array();
    size_t cap = std::min<size_t>(rg.primes.size(), 1000);
    for (size_t i = 0; i < cap; ++i) primes.push_back(rg.primes[i].to_string());
    jr["primes"] = std::move(primes);
    jr["promoted_fraction"] = {
        {"min", rg.promoted_min}, {"mean", rg.promoted_mean}, {"max", rg.promoted_max}};
    results.push_back(std::move(jr));
  }
  j["results"] = std::move(results);
  json ics = json::array();
  for (const auto& ig : rep.ic_sets) {
    ics.push_back(json{{"ics_id", ig.ics_id},
                       {"result_id", ig.result_id},
                       {"vector_count", ig.vector_count},
                       {"ics_size", ig.ics_size},
                       {"promoted_fraction", ig.promoted_fraction}});
  }
  j["ic_sets"] = std::move(ics);
  return j;
}

}  // namespace mixprec
