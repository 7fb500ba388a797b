#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hetgnn/cache_compare.hpp"
#include "hetgnn/config.hpp"
#include "hetgnn/datasets.hpp"
#include "hetgnn/report.hpp"

namespace py = pybind11;
using namespace hetgnn;
using nlohmann::json;

namespace {

// Configs cross the boundary as JSON text; the Python side wraps json.dumps/loads.
TrainConfig config_of(const Dataset& ds, const std::string& train, std::optional<double> cache_fraction) {
  RunSpec s;
  s.train = train_config_from_json(json::parse(train));
  s.cache_budget_fraction = cache_fraction;
  return s.resolved(ds);
}

json sim_json(const SimSummary& s) {
  return {{"makespan", s.makespan},
          {"critical_path", s.critical_path},
          {"utilization", s.utilization},
          {"memory_high_water", s.memory_high_water}};
}

json transfer_json(const TransferRecord& t) {
  return {{"raw_feature_bytes", t.raw_feature_reals * 8},
          {"hot_embedding_bytes", t.hot_embedding_reals * 8},
          {"backward_aux_bytes", t.backward_aux_reals * 8},
          {"gradient_bytes", t.gradient_reals * 8},
          {"total_bytes", t.total_bytes()}};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hetgnn native core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SimulatedOom>(m, "SimulatedOom", PyExc_MemoryError);
  py::register_exception<StalenessViolation>(m, "StalenessViolation", PyExc_RuntimeError);

  m.def("version", &code_version);
  m.def("dataset_names", &dataset_names);
  m.def("default_train_config", [] { return to_json(TrainConfig{}).dump(); });
  m.def("default_budget_fractions", &default_budget_fractions);

  py::class_<Dataset>(m, "Dataset")
      .def_static("load", &load_dataset, py::arg("spec"), py::arg("feat_dim") = 32, py::arg("seed") = 1)
      .def_readonly("name", &Dataset::name)
      .def_property_readonly("num_vertices", [](const Dataset& d) { return d.graph.num_vertices(); })
      .def_property_readonly("num_edges", [](const Dataset& d) { return d.graph.num_edges(); })
      .def_property_readonly("feat_dim", [](const Dataset& d) { return d.data.feat_dim(); })
      .def_property_readonly("num_classes", [](const Dataset& d) { return d.data.num_classes; })
      .def_property_readonly("fingerprint", [](const Dataset& d) { return fingerprint(d); })
      .def("train_vertices", [](const Dataset& d) { return d.data.train_vertices(); })
      .def("degrees", [](const Dataset& d) {
        std::vector<std::uint32_t> out(d.graph.num_vertices());
        for (VertexId v = 0; v < d.graph.num_vertices(); ++v) out[v] = d.graph.degree(v);
        return out;
      });

  m.def(
      "train",
      [](const Dataset& ds, const std::string& train, std::optional<double> cache_fraction) {
        const TrainConfig cfg = config_of(ds, train, cache_fraction);
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_training(ds, cfg);
        }
        return summary_json(r).dump();
      },
      py::arg("dataset"), py::arg("train"), py::arg("cache_fraction") = py::none());

  m.def(
      "simulate",
      [](const Dataset& ds, const std::string& train, const std::string& strategy,
         std::optional<double> cache_fraction) {
        const TrainConfig cfg = config_of(ds, train, cache_fraction);
        const StrategySim s = simulate_strategy(ds, cfg, parse_strategy(strategy));
        return json{{"strategy", to_string(s.strategy)},
                    {"pipelined", sim_json(s.pipelined)},
                    {"serialized", sim_json(s.serialized)},
                    {"transfer", transfer_json(s.transfer)}}
            .dump();
      },
      py::arg("dataset"), py::arg("train"), py::arg("strategy"), py::arg("cache_fraction") = py::none());

  m.def(
      "hotness",
      [](const Dataset& ds, const std::string& train) {
        const TrainConfig cfg = train_config_from_json(json::parse(train));
        const auto t = presample_hotness(ds, cfg);
        return py::make_tuple(t.counts, t.rank);
      },
      py::arg("dataset"), py::arg("train"));

  m.def(
      "compare_cache",
      [](const Dataset& ds, const std::string& train, const std::vector<double>& fractions) {
        const TrainConfig cfg = train_config_from_json(json::parse(train));
        json out = json::array();
        for (const auto& p : compare_cache(ds, cfg, fractions)) {
          out.push_back({{"budget_fraction", p.budget_fraction},
                         {"budget_bytes", p.budget_bytes},
                         {"policy", to_string(p.policy)},
                         {"data_bytes", p.data_bytes},
                         {"gradient_bytes", p.gradient_bytes},
                         {"memory_bytes", p.memory_bytes},
                         {"cached_vertices", p.cached_vertices},
                         {"cpu_vertices", p.cpu_vertices},
                         {"hit_rate", p.hit_rate}});
        }
        return out.dump();
      },
      py::arg("dataset"), py::arg("train"), py::arg("fractions"));
}
