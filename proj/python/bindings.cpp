#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slicepart/ailp.hpp"
#include "slicepart/bnb.hpp"
#include "slicepart/harness.hpp"
#include "slicepart/json_io.hpp"
#include "slicepart/oracle.hpp"

namespace py = pybind11;
using namespace slicepart;

namespace {

// Round-trips through the JSON text form so Python sees plain dicts/lists.
py::object to_python(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Json from_python(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

AssignmentMask mask_from_dict(const std::map<int, int>& fixed) {
  AssignmentMask m;
  m.fixed = fixed;
  return m;
}

py::dict run_to_dict(const SolverRun& run) {
  py::dict d;
  d["status"] = run.status;
  d["assignment"] = run.assignment;
  d["value"] = to_python(to_json(run.value));
  d["explored"] = run.stats.explored;
  d["seconds"] = run.seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "VNF forwarding-graph partitioning across an ordered domain chain";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<Infeasible>(m, "Infeasible", PyExc_RuntimeError);
  py::register_exception<TrainingDiverged>(m, "TrainingDiverged", PyExc_RuntimeError);

  py::class_<VnfFg>(m, "Graph")
      .def(py::init<>())
      .def_static("from_dict", [](const py::object& o) { return graph_from_json(from_python(o)); })
      .def("to_dict", [](const VnfFg& g) { return to_python(to_json(g)); })
      .def_property_readonly("num_nodes", &VnfFg::num_nodes)
      .def_property_readonly("num_edges", &VnfFg::num_edges)
      .def("topological_order", [](const VnfFg& g) { return topological_order(g); })
      .def("issues", [](const VnfFg& g) {
        std::vector<std::string> out;
        for (const auto& i : validate(g).issues) out.push_back(i.message);
        return out;
      })
      .def(py::self == py::self);

  py::class_<DomainChain>(m, "Chain")
      .def_static("default", &default_chain)
      .def_static("from_dict", [](const py::object& o) { return chain_from_json(from_python(o)); })
      .def("to_dict", [](const DomainChain& c) { return to_python(to_json(c)); })
      .def_property_readonly("size", &DomainChain::size)
      .def_readonly("target_distribution", &DomainChain::target_distribution);

  py::class_<ObjectiveWeights>(m, "Weights")
      .def(py::init([](double alpha, double beta, double gamma, double delta, double mu) {
             ObjectiveWeights w{alpha, beta, gamma, delta, mu};
             w.validate();
             return w;
           }),
           py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("gamma") = 1.0, py::arg("delta") = 2.0,
           py::arg("mu") = 10.0)
      .def_readwrite("alpha", &ObjectiveWeights::alpha)
      .def_readwrite("beta", &ObjectiveWeights::beta)
      .def_readwrite("gamma", &ObjectiveWeights::gamma)
      .def_readwrite("delta", &ObjectiveWeights::delta)
      .def_readwrite("mu", &ObjectiveWeights::mu);

  m.def(
      "random_dag",
      [](int num_nodes, int num_edges, std::uint64_t seed) {
        DagParams p;
        p.num_nodes = num_nodes;
        p.num_edges = num_edges;
        p.seed = seed;
        return generate_random_dag(p);
      },
      py::arg("num_nodes"), py::arg("num_edges"), py::arg("seed") = 0);

  m.def(
      "build_corpus",
      [](int count, std::vector<int> nodes, std::vector<int> edges, std::uint64_t seed) {
        CorpusSpec spec;
        spec.count = count;
        spec.node_choices = std::move(nodes);
        spec.edge_choices = std::move(edges);
        spec.seed = seed;
        return build_corpus(spec);
      },
      py::arg("count"), py::arg("nodes") = std::vector<int>{10, 15, 20},
      py::arg("edges") = std::vector<int>{15, 30, 60}, py::arg("seed") = 1);

  m.def(
      "objective",
      [](const VnfFg& g, const DomainChain& c, const HardAssignment& a, const ObjectiveWeights& w) {
        validate_assignment(a, g.num_nodes(), c.size());
        return to_python(to_json(objective(g, c, a, w, normalization_bounds(g, c), DeploymentState::empty(c.size()))));
      },
      py::arg("graph"), py::arg("chain"), py::arg("assignment"), py::arg("weights") = ObjectiveWeights{});

  m.def(
      "is_feasible",
      [](const VnfFg& g, const DomainChain& c, const HardAssignment& a, const std::map<int, int>& mask) {
        return check_feasibility(g, c, a, mask_from_dict(mask)).feasible();
      },
      py::arg("graph"), py::arg("chain"), py::arg("assignment"), py::arg("mask") = std::map<int, int>{});

  py::class_<GnnModel>(m, "GnnModel")
      .def_static("initialize", &GnnModel::initialize, py::arg("latent_size") = 10, py::arg("num_layers") = 3,
                  py::arg("num_domains") = 4, py::arg("seed") = 0)
      .def_static("load", [](const std::string& path) { return model_from_checkpoint(read_json(path)); })
      .def("save",
           [](const GnnModel& model, const std::string& path) {
             write_json(path, checkpoint_json(model, {}, {}));
           })
      .def_property_readonly("parameter_count", &GnnModel::parameter_count)
      .def("forward", [](const GnnModel& model, const VnfFg& g) { return Eigen::MatrixXd(forward(model, g)); })
      .def(
          "infer",
          [](const GnnModel& model, const VnfFg& g, const DomainChain& c, const std::map<int, int>& mask) {
            return infer_with_repair(model, g, c, mask_from_dict(mask));
          },
          py::arg("graph"), py::arg("chain"), py::arg("mask") = std::map<int, int>{});

  m.def(
      "train",
      [](const GnnModel& initial, const std::vector<VnfFg>& train_set, const std::vector<VnfFg>& val_set,
         const DomainChain& c, const ObjectiveWeights& w, int epochs, double lr, std::uint64_t seed) {
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.learning_rate = lr;
        cfg.seed = seed;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(initial, train_set, val_set, c, w, cfg);
        }
        return py::make_tuple(r.model, to_python(to_json(r.history, false)));
      },
      py::arg("model"), py::arg("train_set"), py::arg("val_set"), py::arg("chain"),
      py::arg("weights") = ObjectiveWeights{}, py::arg("epochs") = 200, py::arg("lr") = 0.01, py::arg("seed") = 0);

  m.def(
      "solve",
      [](const std::string& solver, const VnfFg& g, const DomainChain& c, const ObjectiveWeights& w,
         const std::map<int, int>& mask, double time_limit, const GnnModel* model) {
        BnbConfig budget;
        budget.time_limit = time_limit;
        SolverRun run;
        {
          py::gil_scoped_release release;
          run = run_solver(solver_from_string(solver), g, c, w, mask_from_dict(mask),
                           DeploymentState::empty(c.size()), budget, model);
        }
        return run_to_dict(run);
      },
      py::arg("solver"), py::arg("graph"), py::arg("chain"), py::arg("weights") = ObjectiveWeights{},
      py::arg("mask") = std::map<int, int>{}, py::arg("time_limit") = 60.0, py::arg("model") = nullptr);

  m.def(
      "kl_sample",
      [](int n, std::vector<double> p, std::uint64_t seed) {
        return to_python(to_json(sample_kl_distribution(n, p, seed)));
      },
      py::arg("samples"), py::arg("p"), py::arg("seed") = 0);

  m.def("taylor_xlogx", &taylor_xlogx, py::arg("r"), py::arg("a") = 0.3);
}
