#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <variant>

#include "kernelnet/cli.hpp"
#include "kernelnet/fourier.hpp"
#include "kernelnet/mc.hpp"
#include "kernelnet/quadrature.hpp"

namespace py = pybind11;
using namespace kernelnet;

namespace {

using Radius = std::variant<double, std::vector<double>>;

NetworkModel make_model(const ConnectionKernel& kernel, const Radius& radius) {
  if (const auto* r = std::get_if<double>(&radius)) return NetworkModel(Circle{*r}, kernel);
  return NetworkModel(Torus{std::get<std::vector<double>>(radius)}, kernel);
}

std::vector<double> as_vector(const Radius& b) {
  if (const auto* v = std::get_if<double>(&b)) return {*v};
  return std::get<std::vector<double>>(b);
}

py::tuple pair(double value, double error) { return py::make_tuple(value, error); }
py::tuple mc_tuple(const McEstimate& e) { return py::make_tuple(e.mean, e.std_error, e.trials); }

template <class T, class Stat>
std::vector<T> trials(std::size_t n, const ConnectionKernel& kernel, std::size_t count, std::uint64_t seed, Stat stat,
                      unsigned threads) {
  py::gil_scoped_release release;
  const std::size_t shape[] = {n};
  return run_trials<T>(shape, kernel, count, seed, stat, threads);
}

}  // namespace

PYBIND11_MODULE(_kernelnet, m) {
  m.doc() = "Clustering and separation analytics for distance-kernel random networks";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ConnectionKernel>(m, "Kernel")
      .def_static("uniform", &ConnectionKernel::uniform, py::arg("p"), py::arg("phi"))
      .def_static("cosine", &ConnectionKernel::cosine, py::arg("coeffs"))
      .def_static("product", &ConnectionKernel::product, py::arg("factors"))
      .def("__call__", [](const ConnectionKernel& q, double x) { return q(x); })
      .def("__call__", [](const ConnectionKernel& q, const std::vector<double>& x) {
        return q(std::span<const double>(x));
      })
      .def_property_readonly("dimension", &ConnectionKernel::dimension)
      .def("validate", [](const ConnectionKernel& q) { return validate(q); })
      .def("__repr__", &ConnectionKernel::describe);

  m.def("mean_degree", [](const ConnectionKernel& q, const Radius& r) { return mean_degree(make_model(q, r)).value; },
        py::arg("kernel"), py::arg("radius"));

  m.def("coeffs_uniform", [](double p, double phi, std::size_t m) {
    const auto s = coeffs_uniform(p, phi, m);
    return std::vector<double>(s.coeffs().begin(), s.coeffs().end());
  }, py::arg("p"), py::arg("phi"), py::arg("truncation"));
  m.def("coeffs_numeric", [](const ConnectionKernel& q, std::size_t m) {
    const auto s = coeffs_numeric(q, m);
    return std::vector<double>(s.coeffs().begin(), s.coeffs().end());
  }, py::arg("kernel"), py::arg("truncation"));

  m.def("clustering_closed", [](double p, double phi, std::size_t m_tail) {
    const auto e = clustering_uniform_closed(p, phi, m_tail);
    return pair(e.value, e.error);
  }, py::arg("p"), py::arg("phi"), py::arg("m_tail") = 100000);
  m.def("clustering_series", [](const ConnectionKernel& q, double radius, std::size_t truncation, bool full,
                                std::size_t m_corr) {
    const auto model = make_model(q, radius);
    const auto s = model_series(model, truncation);
    CorrectionOptions opts;
    opts.m_corr = m_corr;
    const auto e = clustering_from_series(s[0], radius, mean_degree(model).value,
                                          full ? ClusteringMode::full : ClusteringMode::leading, opts);
    return pair(e.value, e.error);
  }, py::arg("kernel"), py::arg("radius"), py::arg("truncation") = 4096, py::arg("full") = false,
     py::arg("m_corr") = 128);
  m.def("clustering_quad", [](const ConnectionKernel& q, const Radius& r) {
    const auto e = clustering_quad(make_model(q, r));
    return pair(e.value, e.error_estimate);
  }, py::arg("kernel"), py::arg("radius"));

  m.def("p_sep_leading", [](const ConnectionKernel& q, const Radius& r, int k, const Radius& b, std::size_t truncation) {
    const auto model = make_model(q, r);
    const auto series = model_series(model, truncation);
    const auto bv = as_vector(b);
    const auto e = p_sep_torus(series, model.radii(), k, bv);
    return pair(e.value, e.error);
  }, py::arg("kernel"), py::arg("radius"), py::arg("k"), py::arg("b"), py::arg("truncation") = 4096);
  m.def("p_k_pi", [](double p, double phi, double mean_degree, int k, std::size_t m_tail) {
    const auto e = p_k_pi_uniform(p, phi, mean_degree, k, m_tail);
    return py::make_tuple(e.value.value, e.value.error, e.normalized.value);
  }, py::arg("p"), py::arg("phi"), py::arg("mean_degree"), py::arg("k"), py::arg("m_tail") = 100000);
  m.def("p_chain_quad", [](const ConnectionKernel& q, const Radius& r, int k, const Radius& b, bool exclusion) {
    const auto bv = as_vector(b);
    const auto e = p_chain_quad(make_model(q, r), k, bv, exclusion);
    return pair(e.value, e.error_estimate);
  }, py::arg("kernel"), py::arg("radius"), py::arg("k"), py::arg("b"), py::arg("with_exclusion") = false);

  m.def("discrete_chain_count", [](std::size_t n, const ConnectionKernel& q, int k, std::size_t offset) {
    const auto c = discrete_chain_count(n, q, k, offset);
    return py::make_tuple(c.reduced, c.with_exclusion ? py::cast(*c.with_exclusion) : py::none());
  }, py::arg("n"), py::arg("kernel"), py::arg("k"), py::arg("offset"));
  m.def("discrete_mean_degree", &discrete_mean_degree, py::arg("n"), py::arg("kernel"));
  m.def("discrete_clustering", &discrete_clustering, py::arg("n"), py::arg("kernel"));

  m.def("sample_graph", [](std::size_t n, const ConnectionKernel& q, std::uint64_t seed) {
    return sample_graph(n, q, seed).adjacency;
  }, py::arg("n"), py::arg("kernel"), py::arg("seed"));
  m.def("mc_mean_degree", [](std::size_t n, const ConnectionKernel& q, std::size_t count, std::uint64_t seed,
                             unsigned threads) {
    return mc_tuple(summarize(trials<double>(n, q, count, seed, sample_mean_degree, threads)));
  }, py::arg("n"), py::arg("kernel"), py::arg("trials"), py::arg("seed") = 1, py::arg("threads") = 0);
  m.def("mc_clustering", [](std::size_t n, const ConnectionKernel& q, std::size_t count, std::uint64_t seed,
                            unsigned threads) {
    const auto t = trials<ClusteringTally>(n, q, count, seed, clustering_tally, threads);
    return mc_tuple(empirical_clustering(t));
  }, py::arg("n"), py::arg("kernel"), py::arg("trials"), py::arg("seed") = 1, py::arg("threads") = 0);
  m.def("mc_separation_histogram", [](std::size_t n, const ConnectionKernel& q, std::size_t offset,
                                      std::size_t count, std::uint64_t seed, int max_sep, unsigned threads) {
    const auto seps = trials<int>(n, q, count, seed,
                                  [&](const GraphSample& g) { return separation(g, 0, offset, max_sep); }, threads);
    const auto h = histogram_from_separations(seps, max_sep);
    py::list bins;
    for (const auto& b : h.bins) bins.append(py::make_tuple(b.mean, b.std_error));
    return py::make_tuple(bins, py::make_tuple(h.unreached.mean, h.unreached.std_error));
  }, py::arg("n"), py::arg("kernel"), py::arg("offset"), py::arg("trials"), py::arg("seed") = 1,
     py::arg("max_sep") = 8, py::arg("threads") = 0);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv{"kernelnet"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
