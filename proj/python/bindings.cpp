#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "mixprec/bench.hpp"
#include "mixprec/classify.hpp"
#include "mixprec/interp.hpp"
#include "mixprec/nir.hpp"
#include "mixprec/profiler.hpp"
#include "mixprec/rewrite.hpp"
#include "mixprec/sweep.hpp"

namespace py = pybind11;
using namespace mixprec;

namespace {

ExecInput input_from_dict(const py::dict& arrays) {
  ExecInput in;
  for (auto item : arrays) {
    std::string name = py::cast<std::string>(item.first);
    in.arrays[name] = py::cast<std::vector<double>>(item.second);
  }
  return in;
}

py::dict output_to_dict(const ExecOutput& out) {
  py::dict d;
  py::dict arrays;
  for (const auto& [name, arr] : out.arrays) arrays[py::str(name)] = arr.data;
  d["arrays"] = arrays;
  if (out.ret) d["ret"] = *out.ret;
  d["result_id"] = out.result_id();
  d["dynamic_instr_count"] = out.dynamic_instr_count;
  return d;
}

ThresholdVector tv_from_dict(const py::dict& d) {
  ThresholdVector t;
  t.t1 = py::cast<double>(d["t1"]);
  t.t2 = py::cast<double>(d["t2"]);
  t.t3 = py::cast<double>(d["t3"]);
  t.t4 = py::cast<int>(d["t4"]);
  t.t5 = py::cast<int>(d["t5"]);
  t.t6 = py::cast<double>(d["t6"]);
  t.t7 = py::cast<double>(d["t7"]);
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "profile-driven mixed precision tuning over a small SSA IR";

  py::class_<Program>(m, "Program")
      .def("__str__", [](const Program& p) { return print_program(p); })
      .def_property_readonly("entry", [](const Program& p) { return p.entry; });

  py::class_<NumericalProfile>(m, "NumericalProfile")
      .def("to_json", [](const NumericalProfile& np) { return profile_to_json(np).dump(2); })
      .def_property_readonly("size", [](const NumericalProfile& np) { return np.entries.size(); });

  py::class_<InstructionChangeSet>(m, "InstructionChangeSet")
      .def_property_readonly("id", &InstructionChangeSet::id)
      .def_property_readonly("promoted", [](const InstructionChangeSet& ics) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& id : ics.promoted) out.emplace_back(id.function, id.dest);
        return out;
      });

  m.def("parse", [](const std::string& text) { return parse_program(text); });
  m.def("print_text", [](const Program& p) { return print_program(p); });
  m.def("validate", [](const Program& p) {
    std::vector<std::string> out;
    for (const auto& v : validate_program(p)) out.push_back(to_string(v.where) + ": " + v.message);
    return out;
  });

  m.def(
      "run",
      [](const Program& p, const py::dict& arrays, const std::string& precision) {
        PrecisionAssignment pa;
        if (precision == "f32")
          pa = PrecisionAssignment::uniform_f32();
        else if (precision == "f64")
          pa = PrecisionAssignment::uniform_f64();
        return output_to_dict(run_program(p, input_from_dict(arrays), pa));
      },
      py::arg("program"), py::arg("arrays"), py::arg("precision") = "declared");

  m.def("profile", [](const Program& p, const py::dict& arrays) {
    ProfileRun run = profile_program(p, input_from_dict(arrays));
    return py::make_tuple(run.profile, output_to_dict(run.output));
  });

  m.def("classify_ics", [](const Program& p, const NumericalProfile& np, const py::dict& t) {
    Classification cl = classify_profile(np, tv_from_dict(t));
    py::dict bins;
    auto conv = [](const std::set<InstrId>& s) {
      std::vector<std::string> out;
      for (const auto& id : s) out.push_back(to_string(id));
      return out;
    };
    bins["cancellation"] = conv(cl.cancellation_bin);
    bins["promotion"] = conv(cl.promotion_bin);
    bins["benign"] = conv(cl.benign_bin);
    bins["other"] = conv(cl.other_bin);
    return py::make_tuple(bins, compute_ics(cl, p));
  });

  m.def("rewrite", [](const Program& p, const InstructionChangeSet& ics) {
    return rewrite_program(p, ics);
  });

  m.def("lu_program", &lu_program, py::arg("n"));
  m.def(
      "gen_matrix",
      [](int64_t n, uint64_t seed) {
        return gen_matrix({n, seed, -1e6, 1e6}).arrays.at("A");
      },
      py::arg("n"), py::arg("seed") = 42);
  m.def("quad_program", &quad_program, py::arg("order") = 20, py::arg("panels") = 50);
  m.def("quad_arrays", [](int order, int panels) {
    ExecInput in = quad_input(order, panels);
    return py::make_tuple(in.arrays.at("X"), in.arrays.at("W"));
  });

  m.def(
      "sweep",
      [](const Program& p, const py::dict& train, const py::dict& eval, int grid_samples,
         const std::string& metric, int jobs) {
        GridSpec spec = desk_grid(grid_samples);
        SweepOptions opts;
        opts.metric = metric == "frobenius" ? Metric::Frobenius : Metric::AbsError;
        opts.jobs = jobs;
        SweepResult res = run_sweep(p, input_from_dict(train), input_from_dict(eval),
                                    enumerate_grid(spec), opts, &spec);
        py::dict d;
        d["single_error"] = res.single_error;
        d["grid_size"] = res.report.grid_size;
        py::list results;
        for (const auto& rg : res.report.results) {
          py::dict r;
          r["result_id"] = rg.result_id;
          r["accuracy"] = rg.accuracy;
          r["vector_count"] = rg.vector_count;
          r["ics_count"] = rg.ics_ids.size();
          r["prime_count"] = rg.primes.size();
          results.append(r);
        }
        d["results"] = results;
        return d;
      },
      py::arg("program"), py::arg("train"), py::arg("eval"), py::arg("grid_samples") = 2,
      py::arg("metric") = "abs", py::arg("jobs") = 1);
}
