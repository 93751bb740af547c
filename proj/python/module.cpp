#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sparsegrow/dst/erdos_renyi.hpp"
#include "sparsegrow/dst/flops.hpp"
#include "sparsegrow/dst/prune_grow.hpp"
#include "sparsegrow/dst/schedule.hpp"
#include "sparsegrow/experiment/config.hpp"
#include "sparsegrow/experiment/experiment.hpp"
#include "sparsegrow/sparse/kernels.hpp"

namespace py = pybind11;
using namespace sparsegrow;

namespace {

using Pairs = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

std::vector<ConnectionIndex> to_indices(const Pairs& p) {
    std::vector<ConnectionIndex> out;
    out.reserve(p.size());
    for (auto [a, b] : p) out.push_back({a, b});
    return out;
}

Pairs to_pairs(std::span<const ConnectionIndex> c) {
    Pairs out;
    out.reserve(c.size());
    for (const auto& x : c) out.emplace_back(x.in_unit, x.out_unit);
    return out;
}

// One layer-local rewiring on explicit (in, out) pairs. Returns the new
// active set with its weights plus the grown and pruned pairs.
py::dict prune_grow(std::size_t n_in, std::size_t n_out, const Pairs& active, const std::vector<real>& weights,
                    const Pairs& candidates, const std::vector<real>& grads, std::size_t k) {
    ConnectionSet layer(n_in, n_out, to_indices(active), weights);
    const auto S = to_indices(candidates);
    const auto r = apply_prune_grow(layer, S, grads, k);
    py::dict out;
    out["active"] = to_pairs(layer.connections());
    out["weights"] = std::vector<real>(layer.weights().begin(), layer.weights().end());
    out["grown"] = to_pairs(r.grown);
    out["pruned"] = to_pairs(r.pruned);
    out["k"] = r.k;
    return out;
}

py::dict record(const MetricsRecord& m) {
    py::dict d;
    d["epoch"] = m.epoch;
    d["step"] = m.step;
    d["train_loss"] = m.train_loss;
    d["train_acc"] = m.train_acc;
    d["test_acc"] = m.test_acc;
    d["lr"] = m.lr;
    d["active_connections"] = m.active_connections;
    d["rounds_done"] = m.rounds_done;
    d["rounds_in_epoch"] = m.rounds_in_epoch;
    d["mean_subset"] = m.mean_subset;
    d["mean_k"] = m.mean_k;
    return d;
}

}  // namespace

PYBIND11_MODULE(_sparsegrow, m) {
    m.doc() = "Sparse training with prune-grow rewiring";

    // Library errors keep their messages; the categories map onto Python types.
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InfeasibleSparsity>(m, "InfeasibleSparsity", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<DatasetError>(m, "DatasetError", PyExc_OSError);
    py::register_exception<NumericFailure>(m, "NumericFailure", PyExc_ArithmeticError);

    m.def("cosine_decay", &cosine_decay, py::arg("t"), py::arg("alpha"), py::arg("end_step"));
    m.def("ceil_count", &ceil_count, py::arg("factor"), py::arg("n"));
    m.def("prune_grow", &prune_grow, py::arg("n_in"), py::arg("n_out"), py::arg("active"), py::arg("weights"),
          py::arg("candidates"), py::arg("grads"), py::arg("k"));

    m.def(
        "erdos_renyi_counts",
        [](const std::vector<std::size_t>& widths, double sparsity) {
            const auto dims = layer_dims(ModelSpec::mlp(widths));
            return erdos_renyi_counts(dims, solve_epsilon(dims, sparsity));
        },
        py::arg("widths"), py::arg("sparsity"), "Per-layer active counts of an MLP at the target sparsity.");

    m.def(
        "dense_weight_gradient",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> h,
           py::array_t<double, py::array::c_style | py::array::forcecast> delta) {
            if (h.ndim() != 2 || delta.ndim() != 2 || h.shape(1) != delta.shape(1))
                throw py::value_error("expected h (n_in, B) and delta (n_out, B)");
            Matrix hm(h.shape(0), h.shape(1)), dm(delta.shape(0), delta.shape(1));
            std::copy(h.data(), h.data() + h.size(), hm.values().begin());
            std::copy(delta.data(), delta.data() + delta.size(), dm.values().begin());
            const Matrix g = dense_weight_gradient(hm, dm);
            py::array_t<double> out({g.rows(), g.cols()});
            std::copy(g.values().begin(), g.values().end(), out.mutable_data());
            return out;
        },
        py::arg("h"), py::arg("delta"));

    py::class_<ExperimentConfig>(m, "Config")
        .def_readwrite("dataset", &ExperimentConfig::dataset)
        .def_readwrite("data_dir", &ExperimentConfig::data_dir)
        .def_readwrite("sparsity", &ExperimentConfig::sparsity)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("epochs", &ExperimentConfig::epochs)
        .def_readwrite("output_dir", &ExperimentConfig::output_dir)
        .def_property(
            "strategy", [](const ExperimentConfig& c) { return std::string(to_string(c.strategy)); },
            [](ExperimentConfig& c, const std::string& s) { c.strategy = parse_strategy(s); })
        .def_property(
            "gamma", [](const ExperimentConfig& c) { return c.schedule.gamma; },
            [](ExperimentConfig& c, double g) { c.schedule.gamma = g; })
        .def("to_text", &to_text)
        .def("__repr__", [](const ExperimentConfig& c) { return "<Config " + to_text(c) + ">"; });

    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));

    m.def(
        "train",
        [](const ExperimentConfig& c) {
            TrainingResult r;
            {
                py::gil_scoped_release release;
                r = run_training(c);
            }
            py::list history;
            for (const auto& h : r.history) history.append(record(h));
            py::dict out;
            out["history"] = history;
            out["rounds"] = r.rounds.size();
            out["initial_active"] = r.initial_active;
            out["steps"] = r.steps;
            out["end_step"] = r.end_step;
            out["sparsity"] = r.model.sparsity();
            return out;
        },
        py::arg("config"), "Train one model; writes the run artifacts to config.output_dir.");

    m.def(
        "flops_report",
        [](const ExperimentConfig& c, const std::vector<double>& sparsities) {
            py::list rows;
            for (const auto& r : run_flops_report(c, sparsities, false)) {
                py::dict d;
                d["architecture"] = r.architecture;
                d["sparsity"] = r.sparsity;
                d["gse_rigl_ratio"] = r.gse_rigl_ratio();
                d["saving"] = r.saving();
                rows.append(d);
            }
            return rows;
        },
        py::arg("config"), py::arg("sparsities"));
}
