#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hmmsbm/analysis.hpp"
#include "hmmsbm/config.hpp"
#include "hmmsbm/errors.hpp"
#include "hmmsbm/gauss_hmm.hpp"
#include "hmmsbm/prediction.hpp"
#include "hmmsbm/sampler.hpp"
#include "hmmsbm/series_io.hpp"
#include "hmmsbm/synthetic.hpp"
#include "hmmsbm/trace_io.hpp"

namespace py = pybind11;
using namespace hmmsbm;

namespace {

using Array2 = py::array_t<double>;

py::array_t<std::uint8_t> adjacency(const NetworkSeries& s, std::size_t t) {
  const auto& m = s.matrices.at(t);
  const auto n = static_cast<py::ssize_t>(m.size());
  py::array_t<std::uint8_t> out({n, n});
  auto v = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i)
    for (py::ssize_t j = 0; j < n; ++j) v(i, j) = m(std::size_t(i), std::size_t(j)) ? 1 : 0;
  return out;
}

NetworkSeries series_from_arrays(const std::vector<py::array_t<int, py::array::c_style | py::array::forcecast>>& mats,
                                 std::optional<std::vector<std::string>> periods) {
  if (mats.empty()) throw std::invalid_argument("need at least one matrix");
  NetworkSeries s;
  for (const auto& a : mats) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw std::invalid_argument("matrices must be square");
    auto v = a.unchecked<2>();
    std::vector<std::vector<int>> rows(std::size_t(a.shape(0)), std::vector<int>(std::size_t(a.shape(1))));
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
      for (py::ssize_t j = 0; j < a.shape(1); ++j) rows[std::size_t(i)][std::size_t(j)] = v(i, j);
    s.matrices.push_back(Sociomatrix::from_rows(rows));
  }
  s.roster = TraderRoster::numbered(s.matrices.front().size());
  s.periods = periods ? *periods : synthetic_period_labels(mats.size());
  s.validate();
  return s;
}

Array2 square(const std::vector<double>& v, std::size_t n) {
  Array2 out({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(n)});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

CoClusteringMatrix from_array(const Array2& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw std::invalid_argument("co-clustering matrix must be square");
  CoClusteringMatrix m;
  m.dim = std::size_t(a.shape(0));
  auto c = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(a);
  m.omega.assign(c.data(), c.data() + c.size());
  return m;
}

py::dict summary_dict(const NetworkSummary& s) {
  py::dict d;
  for (const auto& name : summary_column_names()) {
    const double v = summary_column(s, name);
    d[py::str(name)] = std::isnan(v) ? py::object(py::none()) : py::object(py::float_(v));
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<NetworkSeries>(m, "NetworkSeries")
      .def_static("from_arrays", &series_from_arrays, py::arg("matrices"), py::arg("periods") = py::none())
      .def_property_readonly("n", [](const NetworkSeries& s) { return s.roster.size(); })
      .def_property_readonly("T", [](const NetworkSeries& s) { return s.matrices.size(); })
      .def_property_readonly("periods", [](const NetworkSeries& s) { return s.periods; })
      .def_property_readonly("roster", [](const NetworkSeries& s) { return s.roster.ids(); })
      .def("adjacency", &adjacency, py::arg("t"))
      .def("__len__", [](const NetworkSeries& s) { return s.matrices.size(); });

  py::class_<ChainTrace>(m, "ChainTrace")
      .def_static("read", py::overload_cast<const std::filesystem::path&>(&read_trace_jsonl), py::arg("path"))
      .def("write", [](const ChainTrace& t, const std::filesystem::path& p) { write_trace_jsonl(t, p); }, py::arg("path"))
      .def("__len__", [](const ChainTrace& t) { return t.samples.size(); })
      .def_property_readonly("iterations", [](const ChainTrace& t) { return t.sample_iterations; })
      .def_property_readonly("zeta", [](const ChainTrace& t) {
        std::vector<std::vector<int>> z;
        for (const auto& s : t.samples) z.push_back(s.zeta);
        return z;
      })
      .def_property_readonly("loglik", [](const ChainTrace& t) {
        std::vector<double> v;
        for (const auto& s : t.scalars) v.push_back(s.loglik);
        return v;
      })
      .def_property_readonly("occupied_states", [](const ChainTrace& t) {
        std::vector<std::size_t> v;
        for (const auto& s : t.scalars) v.push_back(s.occupied_states);
        return v;
      })
      .def("hyper", [](const ChainTrace& t, const std::string& name) { return hyper_values(t.samples, name); },
           py::arg("name"));

  m.def("load_series", &load_series, py::arg("path"));
  m.def("write_series", [](const NetworkSeries& s, const std::filesystem::path& p, bool packed) {
    packed ? write_series_packed(s, p) : write_series_dir(s, p);
  }, py::arg("series"), py::arg("path"), py::arg("packed") = false);
  m.def("summary", [](const NetworkSeries& s) {
    py::list out;
    for (const auto& x : summary_series(s)) out.append(summary_dict(x));
    return out;
  }, py::arg("series"));

  m.def("eppf_log_prob", [](const std::vector<int>& labels, double alpha, double beta) {
    return eppf_log_prob(Partition(labels), PYParams{alpha, beta});
  }, py::arg("labels"), py::arg("alpha"), py::arg("beta"));

  m.def("simulate", [](std::size_t n, std::size_t T, std::uint64_t seed) {
    Rng rng(seed);
    auto d = generate_synthetic(planted_regimes(n, T, rng), n, T, rng);
    return py::make_tuple(d.series, d.truth.zeta);
  }, py::arg("n"), py::arg("T"), py::arg("seed") = 1);

  m.def("fit", [](const NetworkSeries& s, const std::string& preset, std::size_t iters, std::size_t burnin,
                  std::size_t thin, std::uint64_t seed, std::optional<std::size_t> max_states) {
    HyperConfig cfg = preset_config(preset).model;
    if (max_states) cfg.max_states = *max_states;
    py::gil_scoped_release unlock;
    return run_chain(s, cfg, iters, burnin, thin, seed);
  }, py::arg("series"), py::arg("preset") = "default", py::arg("iters") = 1000, py::arg("burnin") = 500,
        py::arg("thin") = 1, py::arg("seed") = 1, py::arg("max_states") = py::none());

  m.def("state_coclustering", [](const ChainTrace& t) {
    const auto c = state_coclustering(t.samples);
    return square(c.omega, c.dim);
  }, py::arg("trace"));
  m.def("point_partition", [](const Array2& a) { return point_partition(from_array(a)); }, py::arg("coclustering"));
  m.def("adjusted_rand_index", [](const std::vector<int>& a, const std::vector<int>& b) {
    return adjusted_rand_index(a, b);
  }, py::arg("a"), py::arg("b"));
  m.def("change_points", [](const std::vector<int>& z) { return change_points(z); }, py::arg("labels"));
  m.def("link_probabilities", [](const ChainTrace& t) {
    const auto p = link_probabilities(t.samples);
    return square(p.probs, p.n);
  }, py::arg("trace"));

  m.def("fit_baseline", [](const Array2& x, std::uint64_t seed, std::size_t iters, std::size_t burnin) {
    if (x.ndim() != 2 || x.shape(1) != 2) throw std::invalid_argument("expected a T x 2 array");
    auto v = x.unchecked<2>();
    BivariateSeries s;
    for (py::ssize_t t = 0; t < x.shape(0); ++t) {
      s.x.emplace_back(v(t, 0), v(t, 1));
      s.periods.push_back(std::to_string(t));
    }
    auto cfg = default_config_from_data(s);
    cfg.iters = iters;
    cfg.burnin = burnin;
    std::vector<std::vector<double>> inc;
    {
      py::gil_scoped_release unlock;
      inc = pairwise_incidence(run_gauss_hmm(s, cfg, seed));
    }
    std::vector<double> flat;
    for (const auto& r : inc) flat.insert(flat.end(), r.begin(), r.end());
    return square(flat, inc.size());
  }, py::arg("x"), py::arg("seed") = 1, py::arg("iters") = 10000, py::arg("burnin") = 1000);

  m.attr("__version__") = HMMSBM_VERSION;
}
