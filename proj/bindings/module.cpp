// Python surface over the core library. Point clouds cross the boundary
// as numpy float64 arrays; graphs and reports come back as plain dicts so
// callers get JSON-shaped data without extra wrapper types.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <string>
#include <vector>

#include "weightscope/analysis.hpp"
#include "weightscope/commands.hpp"
#include "weightscope/dataset.hpp"
#include "weightscope/errors.hpp"
#include "weightscope/mapper.hpp"
#include "weightscope/pca.hpp"
#include "weightscope/snapshot.hpp"
#include "weightscope/trajectory.hpp"
#include "weightscope/version.hpp"

namespace py = pybind11;
using weightscope::DataError;
using weightscope::UsageError;
using weightscope::linalg::Matrix;
using weightscope::nn::TrajectoryCloud;
namespace wa = weightscope::analysis;
namespace wm = weightscope::mapper;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DoubleArray& arr, const char* what) {
    if (arr.ndim() != 2) {
        throw UsageError(std::string(what) + " must be a 2-d array, got " +
                         std::to_string(arr.ndim()) + " dimensions");
    }
    Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    std::memcpy(m.data().data(), arr.data(), sizeof(double) * m.size());
    return m;
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::memcpy(out.mutable_data(), m.data().data(), sizeof(double) * m.size());
    return out;
}

TrajectoryCloud to_cloud(const DoubleArray& points, std::size_t steps, std::size_t neurons,
                         std::size_t layer = 0) {
    TrajectoryCloud cloud;
    cloud.layer_index = layer;
    cloud.steps = steps;
    cloud.neurons = neurons;
    cloud.points = to_matrix(points, "points");
    cloud.dim = cloud.points.cols();
    if (cloud.points.rows() != steps * neurons) {
        throw UsageError("points has " + std::to_string(cloud.points.rows()) +
                         " rows, expected steps*neurons = " + std::to_string(steps * neurons));
    }
    return cloud;
}

wm::MapperParams make_params(const std::string& filter, std::size_t pca_k,
                             std::size_t intervals, double overlap, double eps,
                             std::size_t min_samples, int max_dim) {
    wm::MapperParams p;
    if (filter == "l2") {
        p.filter = wm::FilterKind::l2;
    } else if (filter == "pca") {
        p.filter = wm::FilterKind::pca;
    } else {
        throw UsageError("unknown filter '" + filter + "' (expected 'l2' or 'pca')");
    }
    p.pca_k = pca_k;
    p.n_intervals = intervals;
    p.overlap = overlap;
    p.eps = eps;
    p.min_samples = min_samples;
    p.max_dim = max_dim;
    return p;
}

py::dict graph_to_dict(const wm::LearningGraph& g) {
    py::list nodes;
    for (const auto& v : g.vertices) {
        py::dict n;
        n["id"] = v.id;
        n["size"] = v.size;
        n["mean_step"] = v.mean_step;
        n["cover_element"] = v.cover_element;
        n["members"] = v.members;
        nodes.append(std::move(n));
    }
    py::list edges;
    for (const auto& e : g.edges) {
        py::dict d;
        d["a"] = e.a;
        d["b"] = e.b;
        d["weight"] = e.weight;
        edges.append(std::move(d));
    }
    py::list triangles;
    for (const auto& t : g.triangles) triangles.append(t);
    py::dict out;
    out["nodes"] = std::move(nodes);
    out["edges"] = std::move(edges);
    out["triangles"] = std::move(triangles);
    return out;
}

double resolve_tau(const TrajectoryCloud& cloud, double tau) {
    if (tau > 0.0) return tau;
    const double d = wa::default_tau(cloud);
    return d > 0.0 ? d : 1e-12;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Weight-trajectory analysis core";
    m.attr("__version__") = weightscope::kVersion;

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

    m.def(
        "synth_tree_cloud",
        [](std::size_t branches, std::size_t points_per_branch, double noise,
           std::uint64_t seed) {
            const auto cloud =
                weightscope::data::synth_tree_cloud(branches, points_per_branch, noise, seed);
            py::array_t<std::uint32_t> tags(cloud.tags.size());
            std::memcpy(tags.mutable_data(), cloud.tags.data(),
                        sizeof(std::uint32_t) * cloud.tags.size());
            return py::make_tuple(to_array(cloud.coords), std::move(tags));
        },
        py::arg("branches"), py::arg("points_per_branch"), py::arg("noise") = 0.0,
        py::arg("seed") = 1,
        "Planar tree-shaped test cloud; returns (coords, segment_tags).");

    m.def(
        "dbscan",
        [](const DoubleArray& points, double eps, std::size_t min_samples) {
            const auto labels = wm::dbscan(to_matrix(points, "points"), eps, min_samples);
            py::array_t<int> out(labels.size());
            std::memcpy(out.mutable_data(), labels.data(), sizeof(int) * labels.size());
            return out;
        },
        py::arg("points"), py::arg("eps"), py::arg("min_samples"),
        "Density clustering labels; -1 marks noise.");

    m.def(
        "filter_l2",
        [](const DoubleArray& points) {
            return to_array(wm::filter_l2(to_matrix(points, "points")).values);
        },
        py::arg("points"), "Per-point L2 norms as an (n, 1) array.");

    m.def(
        "filter_pca",
        [](const DoubleArray& points, std::size_t k) {
            return to_array(wm::filter_pca(to_matrix(points, "points"), k).values);
        },
        py::arg("points"), py::arg("k"), "PCA-k filter values as an (n, k) array.");

    m.def(
        "pca_fit",
        [](const DoubleArray& points, std::size_t k, std::size_t stride) {
            const auto basis =
                weightscope::linalg::pca_fit(to_matrix(points, "points"), k, stride);
            py::dict out;
            py::array_t<double> mean(basis.mean.size());
            std::memcpy(mean.mutable_data(), basis.mean.data(),
                        sizeof(double) * basis.mean.size());
            py::array_t<double> ev(basis.explained_variance.size());
            std::memcpy(ev.mutable_data(), basis.explained_variance.data(),
                        sizeof(double) * basis.explained_variance.size());
            out["mean"] = std::move(mean);
            out["components"] = to_array(basis.components);
            out["explained_variance"] = std::move(ev);
            return out;
        },
        py::arg("points"), py::arg("k"), py::arg("stride") = 1,
        "PCA basis dict: mean, components (k x d rows), explained_variance.");

    m.def(
        "mapper_graph",
        [](const DoubleArray& points, std::size_t steps, std::size_t neurons,
           const std::string& filter, std::size_t pca_k, std::size_t intervals, double overlap,
           double eps, std::size_t min_samples, int max_dim) {
            const TrajectoryCloud cloud = to_cloud(points, steps, neurons);
            const auto params =
                make_params(filter, pca_k, intervals, overlap, eps, min_samples, max_dim);
            return graph_to_dict(wm::mapper_pipeline(cloud, params));
        },
        py::arg("points"), py::arg("steps"), py::arg("neurons"), py::arg("filter") = "l2",
        py::arg("pca_k") = 3, py::arg("intervals") = 30, py::arg("overlap") = 0.5,
        py::arg("eps") = 0.0, py::arg("min_samples") = 3, py::arg("max_dim") = 1,
        "Learning graph of a trajectory cloud as a nodes/edges/triangles dict.");

    m.def(
        "branch_report",
        [](const DoubleArray& points, std::size_t steps, std::size_t neurons,
           const std::string& filter, std::size_t pca_k, std::size_t intervals, double overlap,
           double eps, std::size_t min_samples, double tau) {
            const TrajectoryCloud cloud = to_cloud(points, steps, neurons);
            const auto params =
                make_params(filter, pca_k, intervals, overlap, eps, min_samples, 1);
            const auto graph = wm::mapper_pipeline(cloud, params);
            wa::BranchReport report = wa::branch_count(cloud, graph);
            const double tau_used = resolve_tau(cloud, tau);
            report.branching_events = wa::branching_times(cloud, tau_used);

            py::dict out;
            out["final_branch_count"] = report.final_branch_count;
            out["branch_members"] = report.branch_members;
            py::list events;
            for (const auto& ev : report.branching_events) {
                py::dict e;
                e["step"] = ev.step;
                e["parts"] = ev.parts;
                events.append(std::move(e));
            }
            out["branching_events"] = std::move(events);
            out["tau"] = tau_used;
            return out;
        },
        py::arg("points"), py::arg("steps"), py::arg("neurons"), py::arg("filter") = "l2",
        py::arg("pca_k") = 3, py::arg("intervals") = 30, py::arg("overlap") = 0.5,
        py::arg("eps") = 0.0, py::arg("min_samples") = 3, py::arg("tau") = 0.0,
        "Branch count, members and permanent-separation events for one layer.");

    m.def(
        "weight_norms",
        [](const DoubleArray& points, std::size_t steps, std::size_t neurons) {
            const auto series = wa::weight_norms(to_cloud(points, steps, neurons));
            py::array_t<double> out({series.neurons, series.steps});
            for (std::size_t n = 0; n < series.neurons; ++n) {
                std::memcpy(out.mutable_data(n, 0), series.per_neuron[n].data(),
                            sizeof(double) * series.steps);
            }
            return out;
        },
        py::arg("points"), py::arg("steps"), py::arg("neurons"),
        "Per-neuron norm curves as a (neurons, steps) array.");

    m.def(
        "read_snapshots",
        [](const std::filesystem::path& path) {
            const auto clouds = weightscope::io::read_snapshots(path);
            py::list out;
            for (const auto& c : clouds) {
                py::dict d;
                d["layer"] = c.layer_index;
                py::array_t<double> pts({c.steps, c.neurons, c.dim});
                std::memcpy(pts.mutable_data(), c.points.data().data(),
                            sizeof(double) * c.points.size());
                d["points"] = std::move(pts);
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("path"),
        "Snapshot layers as dicts with a (steps, neurons, dim) points array.");

    m.def(
        "write_snapshots",
        [](const std::filesystem::path& path, const py::sequence& layers) {
            std::vector<TrajectoryCloud> clouds;
            for (const auto& item : layers) {
                const py::dict d = item.cast<py::dict>();
                const auto arr = d["points"].cast<DoubleArray>();
                if (arr.ndim() != 3) {
                    throw UsageError("points must be a (steps, neurons, dim) array");
                }
                TrajectoryCloud c;
                c.layer_index = d["layer"].cast<std::size_t>();
                c.steps = static_cast<std::size_t>(arr.shape(0));
                c.neurons = static_cast<std::size_t>(arr.shape(1));
                c.dim = static_cast<std::size_t>(arr.shape(2));
                c.points = Matrix(c.steps * c.neurons, c.dim);
                std::memcpy(c.points.data().data(), arr.data(),
                            sizeof(double) * c.points.size());
                clouds.push_back(std::move(c));
            }
            weightscope::io::write_snapshots(path, clouds);
        },
        py::arg("path"), py::arg("layers"),
        "Write snapshot layers; inverse of read_snapshots.");

    m.def(
        "train",
        [](const std::filesystem::path& config_path, const std::filesystem::path& out_dir) {
            py::gil_scoped_release release;
            weightscope::cli::cmd_train(config_path, out_dir);
        },
        py::arg("config_path"), py::arg("out_dir"),
        "Run a recorded training job from a JSON config; writes snapshots "
        "and logs into out_dir.");

    m.def(
        "mapper_files",
        [](const std::filesystem::path& snapshots, std::size_t layer, const std::string& filter,
           std::size_t intervals, double overlap, double eps, std::size_t min_samples,
           int max_dim, const std::filesystem::path& out_dir) {
            weightscope::cli::MapperOptions opt;
            opt.snapshots = snapshots;
            opt.layer = layer;
            opt.filter = filter;
            opt.intervals = intervals;
            opt.overlap = overlap;
            opt.eps = eps;
            opt.min_samples = min_samples;
            opt.max_dim = max_dim;
            opt.out = out_dir;
            py::gil_scoped_release release;
            weightscope::cli::cmd_mapper(opt);
        },
        py::arg("snapshots"), py::arg("layer") = 0, py::arg("filter") = "l2",
        py::arg("intervals") = 30, py::arg("overlap") = 0.5, py::arg("eps") = 0.0,
        py::arg("min_samples") = 3, py::arg("max_dim") = 1, py::arg("out_dir") = ".",
        "File-level mapper: read a snapshot container, write graph.json, "
        "graph.dot and meta.json into out_dir. filter accepts 'l2' or 'pca<k>'.");
}
