#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mixprec/bench.hpp"
#include "mixprec/classify.hpp"
#include "mixprec/interp.hpp"
#include "mixprec/nir.hpp"
#include "mixprec/profiler.hpp"
#include "mixprec/rewrite.hpp"
#include "mixprec/sweep.hpp"

using nlohmann::json;
using namespace mixprec;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

Program load_program(const std::string& path) {
  Program p = parse_program(slurp(path));
  auto violations = validate_program(p);
  if (!violations.empty()) {
    std::ostringstream os;
    os << path << " does not validate:\n";
    for (const auto& v : violations) os << "  " << to_string(v.where) << ": " << v.message << '\n';
    throw Error(os.str());
  }
  return p;
}

PrecisionAssignment parse_precision(const std::string& mode) {
  if (mode == "declared" || mode == "mixed") return PrecisionAssignment::declared();
  if (mode == "f32") return PrecisionAssignment::uniform_f32();
  if (mode == "f64") return PrecisionAssignment::uniform_f64();
  throw Error("unknown precision mode '" + mode + "'");
}

Metric parse_metric(const std::string& m, const Program& p) {
  if (m == "abs") return Metric::AbsError;
  if (m == "frobenius") return Metric::Frobenius;
  if (m == "auto") {
    for (const auto& f : p.functions)
      if (f.name == p.entry) return f.ret ? Metric::AbsError : Metric::Frobenius;
  }
  throw Error("unknown metric '" + m + "'");
}

json output_to_json(const ExecOutput& out) {
  json j;
  json arrays = json::object();
  char buf[64];
  for (const auto& [name, arr] : out.arrays) {
    json vals = json::array();
    for (double v : arr.data) {
      if (arr.elem == Type::F32)
        std::snprintf(buf, sizeof buf, "%.9g", v);
      else
        std::snprintf(buf, sizeof buf, "%.17g", v);
      vals.push_back(std::string(buf));
    }
    arrays[name] = {{"elem", type_name(arr.elem)}, {"values", vals}};
  }
  j["arrays"] = arrays;
  if (out.ret) {
    std::snprintf(buf, sizeof buf, out.ret_type == Type::F32 ? "%.9g" : "%.17g", *out.ret);
    j["ret"] = std::string(buf);
    j["ret_type"] = type_name(out.ret_type);
  }
  j["dynamic_instr_count"] = out.dynamic_instr_count;
  j["result_id"] = out.result_id();
  json counts = json::object();
  for (const auto& [key, n] : out.op_counts) {
    std::string k = std::string(opcode_name(key.first)) + "." + type_name(key.second);
    counts[k] = n;
  }
  j["op_counts"] = counts;
  return j;
}

struct CommonOpts {
  std::string program;
  std::string input;
};

int cmd_profile(const std::string& prog_path, const std::string& input_path,
                const std::string& out_profile, const std::string& out_ddfg,
                const std::string& out_output) {
  Program p = load_program(prog_path);
  ExecInput input = load_manifest(input_path);
  ProfileRun run = profile_program(p, input);
  if (!out_profile.empty()) spit(out_profile, profile_to_json(run.profile).dump(2) + "\n");
  if (!out_ddfg.empty()) spit(out_ddfg, ddfg_to_dot(run.ddfg));
  if (!out_output.empty()) spit(out_output, output_to_json(run.output).dump(2) + "\n");
  std::printf("profiled %zu instructions, %llu dynamic instances\n", run.profile.entries.size(),
              static_cast<unsigned long long>(run.output.dynamic_instr_count));
  return 0;
}

int cmd_classify(const std::string& prog_path, const std::string& profile_path,
                 const std::string& thresholds, const std::string& out_ics) {
  Program p = load_program(prog_path);
  NumericalProfile np = profile_from_json(json::parse(slurp(profile_path)));
  if (np.program_hash != program_hash(p))
    std::fprintf(stderr, "warning: profile was taken from a different program text\n");
  ThresholdVector t = parse_threshold_vector(thresholds);
  Classification cl = classify_profile(np, t);
  auto print_bin = [](const char* name, const std::set<InstrId>& bin) {
    std::printf("%s:", name);
    for (const auto& id : bin) std::printf(" %s", to_string(id).c_str());
    std::printf("\n");
  };
  print_bin("cancellation", cl.cancellation_bin);
  print_bin("promotion", cl.promotion_bin);
  print_bin("benign", cl.benign_bin);
  print_bin("other", cl.other_bin);
  InstructionChangeSet ics = compute_ics(cl, p);
  std::printf("ics (%zu):", ics.promoted.size());
  for (const auto& id : ics.promoted) std::printf(" %s", to_string(id).c_str());
  std::printf("\n");
  if (!out_ics.empty()) spit(out_ics, ics_to_json(ics).dump(2) + "\n");
  return 0;
}

int cmd_rewrite(const std::string& prog_path, const std::string& ics_path,
                const std::string& out_path) {
  Program p = load_program(prog_path);
  InstructionChangeSet ics = ics_from_json(json::parse(slurp(ics_path)));
  Program rewritten = rewrite_program(p, ics);
  std::string text = print_program(rewritten);
  if (out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    spit(out_path, text);
  return 0;
}

int cmd_run(const std::string& prog_path, const std::string& input_path,
            const std::string& precision, const std::string& baseline_precision,
            const std::string& metric_name, const std::string& out_path, double vec_width) {
  Program p = load_program(prog_path);
  ExecInput input = load_manifest(input_path);
  PrecisionAssignment pa = parse_precision(precision);

  auto t0 = std::chrono::steady_clock::now();
  ExecOutput out = run_program(p, input, pa);
  auto t1 = std::chrono::steady_clock::now();
  ProfileCollector sink;
  ExecOutput profiled = run_program(p, input, pa, &sink);
  auto t2 = std::chrono::steady_clock::now();
  if (profiled.result_id() != out.result_id())
    throw Error("profiled run diverged from plain run");

  json j = output_to_json(out);
  j["scalar_cost"] = cost_estimate(out.op_counts, CostModel::scalar());
  j["vector_cost"] = cost_estimate(out.op_counts, CostModel::vec(vec_width));
  if (!baseline_precision.empty()) {
    ExecOutput base = run_program(p, input, parse_precision(baseline_precision));
    Metric m = parse_metric(metric_name, p);
    j["accuracy_vs_baseline"] = accuracy(out, base, m);
    j["baseline_precision"] = baseline_precision;
  }
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    spit(out_path, text);

  double plain_s = std::chrono::duration<double>(t1 - t0).count();
  double prof_s = std::chrono::duration<double>(t2 - t1).count();
  std::fprintf(stderr, "run: %.6fs plain, %.6fs profiled, overhead ratio %.2f\n", plain_s,
               prof_s, plain_s > 0 ? prof_s / plain_s : 0.0);
  return 0;
}

int cmd_sweep(const std::string& prog_path, const std::string& train_path,
              const std::string& eval_path, const std::string& grid_path, int grid_k,
              const std::string& metric_name, int jobs, bool no_dedupe,
              const std::string& out_csv, const std::string& out_report) {
  Program p = load_program(prog_path);
  ExecInput train = load_manifest(train_path);
  ExecInput eval = eval_path.empty() ? train : load_manifest(eval_path);
  GridSpec spec = grid_path.empty() ? desk_grid(grid_k) : load_grid(grid_path);
  std::vector<ThresholdVector> grid = enumerate_grid(spec);
  SweepOptions opts;
  opts.metric = parse_metric(metric_name, p);
  opts.jobs = jobs;
  opts.dedupe = !no_dedupe;
  SweepResult res = run_sweep(p, train, eval, grid, opts, &spec);
  if (!out_csv.empty()) spit(out_csv, sweep_csv(res.records));
  json rep = report_to_json(res.report);
  rep["single_error"] = res.single_error;
  rep["single_result_id"] = res.single_result_id;
  rep["double_result_id"] = res.double_result_id;
  if (!out_report.empty()) spit(out_report, rep.dump(2) + "\n");
  std::printf("sweep: %zu vectors, %zu unique results, single error %.6g\n",
              res.records.size(), res.report.results.size(), res.single_error);
  for (const auto& rg : res.report.results)
    std::printf("  result %s: %llu vectors, %zu ICSs, %zu primes, error %.6g\n",
                rg.result_id.c_str(), static_cast<unsigned long long>(rg.vector_count),
                rg.ics_ids.size(), rg.primes.size(), rg.accuracy);
  return 0;
}

int cmd_bench(const std::string& which, int64_t n, uint64_t seed, int order, int panels,
              const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::filesystem::path dir(out_dir);
  if (which == "lu") {
    Program p = lu_program(n);
    spit((dir / ("lu" + std::to_string(n) + ".nir")).string(), print_program(p));
    ExecInput in = gen_matrix({n, seed, -1e6, 1e6});
    write_manifest((dir / ("lu" + std::to_string(n) + ".manifest")).string(), in,
                   {{"A", Type::F32}});
    std::printf("wrote lu%lld.nir and inputs (seed %llu) to %s\n",
                static_cast<long long>(n), static_cast<unsigned long long>(seed),
                out_dir.c_str());
  } else if (which == "quad") {
    Program p = quad_program(order, panels);
    spit((dir / "quad.nir").string(), print_program(p));
    ExecInput in = quad_input(order, panels);
    write_manifest((dir / "quad.manifest").string(), in,
                   {{"X", Type::F32}, {"W", Type::F32}});
    std::printf("wrote quad.nir (order %d, %d panels) and inputs to %s\n", order, panels,
                out_dir.c_str());
  } else {
    throw Error("unknown benchmark '" + which + "' (expected lu or quad)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixprec: profile-driven mixed precision tuning for the nir IR"};
  app.require_subcommand(1);

  std::string prog, input, train, eval_in, out_profile, out_ddfg, out_output, out_ics;
  std::string profile_path, thresholds, ics_path, out_path, precision = "declared";
  std::string baseline, metric = "auto", grid_path, out_csv, out_report;
  std::string bench_kind, out_dir = ".";
  int jobs = 1, grid_k = 3, order = 20, panels = 50;
  int64_t n = 100;
  uint64_t seed = 42;
  bool no_dedupe = false;
  double vec_width = 256;

  auto* profile_cmd = app.add_subcommand("profile", "profile a program on an input");
  profile_cmd->add_option("program", prog)->required();
  profile_cmd->add_option("--input", input)->required();
  profile_cmd->add_option("--out-profile", out_profile);
  profile_cmd->add_option("--out-ddfg", out_ddfg);
  profile_cmd->add_option("--out-output", out_output);

  auto* classify_cmd = app.add_subcommand("classify", "bin instructions under a threshold vector");
  classify_cmd->add_option("program", prog)->required();
  classify_cmd->add_option("--profile", profile_path)->required();
  classify_cmd->add_option("--thresholds", thresholds)->required();
  classify_cmd->add_option("--out-ics", out_ics);

  auto* rewrite_cmd = app.add_subcommand("rewrite", "promote an instruction change set");
  rewrite_cmd->add_option("program", prog)->required();
  rewrite_cmd->add_option("--ics", ics_path)->required();
  rewrite_cmd->add_option("--out", out_path);

  auto* run_cmd = app.add_subcommand("run", "execute at a precision mode");
  run_cmd->add_option("program", prog)->required();
  run_cmd->add_option("--input", input)->required();
  run_cmd->add_option("--precision", precision)->check(CLI::IsMember({"declared", "mixed", "f32", "f64"}));
  run_cmd->add_option("--baseline", baseline)->check(CLI::IsMember({"f32", "f64", "declared"}));
  run_cmd->add_option("--metric", metric)->check(CLI::IsMember({"auto", "abs", "frobenius"}));
  run_cmd->add_option("--out", out_path);
  run_cmd->add_option("--vector-width", vec_width);

  auto* sweep_cmd = app.add_subcommand("sweep", "grid sweep with equivalence report");
  sweep_cmd->add_option("program", prog)->required();
  sweep_cmd->add_option("--train", train)->required();
  sweep_cmd->add_option("--eval", eval_in);
  sweep_cmd->add_option("--grid", grid_path, "grid config file (default: built-in grid)");
  sweep_cmd->add_option("--grid-samples", grid_k, "values per threshold for the built-in grid")
      ->check(CLI::Range(1, 6));
  sweep_cmd->add_option("--metric", metric)->check(CLI::IsMember({"auto", "abs", "frobenius"}));
  sweep_cmd->add_option("--jobs", jobs)->check(CLI::Range(1, 256));
  sweep_cmd->add_flag("--no-dedupe", no_dedupe, "evaluate every vector (no ICS dedup)");
  sweep_cmd->add_option("--out-csv", out_csv);
  sweep_cmd->add_option("--out-report", out_report);

  auto* bench_cmd = app.add_subcommand("bench", "emit benchmark programs and inputs");
  bench_cmd->add_option("kind", bench_kind, "lu or quad")->required();
  bench_cmd->add_option("--n", n);
  bench_cmd->add_option("--seed", seed);
  bench_cmd->add_option("--order", order);
  bench_cmd->add_option("--panels", panels);
  bench_cmd->add_option("--out-dir", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (profile_cmd->parsed())
      return cmd_profile(prog, input, out_profile, out_ddfg, out_output);
    if (classify_cmd->parsed()) return cmd_classify(prog, profile_path, thresholds, out_ics);
    if (rewrite_cmd->parsed()) return cmd_rewrite(prog, ics_path, out_path);
    if (run_cmd->parsed())
      return cmd_run(prog, input, precision, baseline, metric, out_path, vec_width);
    if (sweep_cmd->parsed())
      return cmd_sweep(prog, train, eval_in, grid_path, grid_k, metric, jobs, no_dedupe,
                       out_csv, out_report);
    if (bench_cmd->parsed()) return cmd_bench(bench_kind, n, seed, order, panels, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
