#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>

#include "dsbs/datasets.hpp"
#include "dsbs/drift.hpp"
#include "dsbs/errors.hpp"
#include "dsbs/experiment.hpp"
#include "dsbs/metrics.hpp"
#include "dsbs/sampler.hpp"
#include "dsbs/sde.hpp"

namespace py = pybind11;
using namespace dsbs;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Dataset to_dataset(const Array& a) {
    if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array of shape (n, d)");
    const auto n = static_cast<std::size_t>(a.shape(0));
    const auto d = static_cast<std::size_t>(a.shape(1));
    return Dataset(n, d, std::vector<double>(a.data(), a.data() + n * d));
}

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw InvalidArgument("expected a 1-D array");
    return {a.data(), a.data() + a.size()};
}

Array to_array(const Dataset& ds) {
    return Array({static_cast<py::ssize_t>(ds.size()), static_cast<py::ssize_t>(ds.dim())}, ds.values().data());
}

Array to_array(const std::vector<double>& v) {
    return Array(static_cast<py::ssize_t>(v.size()), v.data());
}

ReferenceSde make_sde(const std::string& family, std::size_t dim, double tau, bool exact_variance) {
    SdeChoice c;
    c.family = parse_family(family);
    c.tau = tau;
    c.subvp_exact_variance = exact_variance;
    return c.build(dim);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sample-based Schrodinger bridge sampler";
    m.attr("__version__") = version();

    py::register_exception<NumericFailure>(m, "NumericFailure", PyExc_ArithmeticError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<ReferenceSde>(m, "ReferenceSde")
        .def(py::init(&make_sde), py::arg("family"), py::arg("dim"), py::arg("tau") = 1.0,
             py::arg("exact_variance") = false,
             "family is 've', 'vp' or 'subvp'; VE uses alpha(t) = t, the others beta(t) = tau exp(-tau t)")
        .def_property_readonly("family", [](const ReferenceSde& s) { return to_string(s.family()); })
        .def_property_readonly("dim", &ReferenceSde::dim)
        .def("transition", [](const ReferenceSde& s, double t0, double t1) {
            const auto k = transition_params(s, t0, t1);
            return py::make_tuple(k.mean_scale, k.variance);
        }, py::arg("s"), py::arg("t"), "(mean_scale, variance) of the kernel from s to t")
        .def("diffusion", [](const ReferenceSde& s, double t) { return diffusion_coeff(s, t); }, py::arg("t"))
        .def("__repr__", [](const ReferenceSde& s) {
            return "ReferenceSde(" + to_string(s.family()) + ", dim=" + std::to_string(s.dim()) + ")";
        });

    py::class_<DriftEvaluator>(m, "DriftEvaluator")
        .def(py::init([](const ReferenceSde& sde, const Array& data, std::optional<Array> start, std::size_t subsample,
                         std::uint64_t subsample_seed) {
                 DriftOptions opt;
                 opt.subsample = subsample;
                 opt.subsample_seed = subsample_seed;
                 return DriftEvaluator(sde, to_dataset(data), start ? to_vector(*start) : std::vector<double>{},
                                       opt);
             }),
             py::arg("sde"), py::arg("data"), py::arg("start") = py::none(), py::arg("subsample") = 0,
             py::arg("subsample_seed") = 0)
        .def_property_readonly("dim", &DriftEvaluator::dim)
        .def_property_readonly("data", [](const DriftEvaluator& ev) { return to_array(ev.dataset()); })
        .def("drift", [](const DriftEvaluator& ev, const Array& x, double t) {
            return to_array(ev.empirical_drift(to_vector(x), t));
        }, py::arg("x"), py::arg("t"))
        .def("grad_log_h", [](const DriftEvaluator& ev, const Array& x, double t) {
            return to_array(ev.grad_log_h(to_vector(x), t));
        }, py::arg("x"), py::arg("t"))
        .def("log_partition", [](const DriftEvaluator& ev, const Array& x, double t) {
            return ev.log_partition(to_vector(x), t);
        }, py::arg("x"), py::arg("t"))
        .def("weights", [](const DriftEvaluator& ev, const Array& x, double t) {
            std::vector<double> w(ev.dataset().size());
            ev.softmax_weights(to_vector(x), t, w);
            return to_array(w);
        }, py::arg("x"), py::arg("t"));

    m.def("sample", [](const DriftEvaluator& ev, std::size_t particles, std::size_t steps, std::uint64_t seed,
                       std::size_t workers) {
        SamplerConfig cfg;
        cfg.grid = TimeGrid::uniform(steps);
        cfg.particles = particles;
        cfg.seed = seed;
        cfg.workers = workers;
        std::optional<SampleBatch> batch;
        {
            py::gil_scoped_release release;
            batch.emplace(sample_batch(ev, cfg));
        }
        return to_array(batch->terminal);
    }, py::arg("evaluator"), py::arg("particles"), py::arg("steps") = 100, py::arg("seed") = 0,
       py::arg("workers") = 0, "Terminal states of Euler-Maruyama paths on a uniform grid");

    m.def("make_moons", [](std::size_t n, double noise, std::uint64_t seed) {
        return to_array(make_moons(n, noise, seed));
    }, py::arg("n"), py::arg("noise") = benchmark_defaults::kMoonsNoise, py::arg("seed") = 0);
    m.def("make_eight_gaussians", [](std::size_t n, double radius, double component_std, double global_scale,
                                     std::uint64_t seed) {
        return to_array(make_eight_gaussians(n, radius, component_std, global_scale, seed));
    }, py::arg("n"), py::arg("radius") = benchmark_defaults::kEightRadius,
       py::arg("component_std") = benchmark_defaults::kEightComponentStd,
       py::arg("global_scale") = benchmark_defaults::kEightGlobalScale, py::arg("seed") = 0);
    m.def("eight_gaussian_centers", [](double radius, double global_scale) {
        return to_array(eight_gaussian_centers(radius, global_scale));
    }, py::arg("radius") = benchmark_defaults::kEightRadius,
       py::arg("global_scale") = benchmark_defaults::kEightGlobalScale);

    m.def("w2_exact", [](const Array& a, const Array& b) {
        const auto da = to_dataset(a), db = to_dataset(b);
        py::gil_scoped_release release;
        return w2_exact(da, db);
    }, py::arg("a"), py::arg("b"));
    m.def("w2_entropic", [](const Array& a, const Array& b, std::optional<double> epsilon, std::size_t max_iter) {
        const auto da = to_dataset(a), db = to_dataset(b);
        EntropicResult r;
        {
            py::gil_scoped_release release;
            r = w2_entropic(da, db, epsilon ? *epsilon : 0.01 * median_squared_distance(da, db), max_iter);
        }
        py::dict d;
        d["w2"] = r.w2;
        d["epsilon"] = r.epsilon;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        return d;
    }, py::arg("a"), py::arg("b"), py::arg("epsilon") = py::none(), py::arg("max_iter") = 20000,
       "epsilon defaults to 0.01 x the median squared distance");
    m.def("w2_subsampled", [](const Array& a, const Array& b, std::size_t subsample, std::size_t repetitions,
                              std::uint64_t seed) {
        const auto da = to_dataset(a), db = to_dataset(b);
        py::gil_scoped_release release;
        return w2_subsampled(da, db, subsample, repetitions, seed).values;
    }, py::arg("a"), py::arg("b"), py::arg("subsample") = 2000, py::arg("repetitions") = 5, py::arg("seed") = 0);
    m.def("energy_distance", [](const Array& a, const Array& b) {
        return energy_distance(to_dataset(a), to_dataset(b));
    }, py::arg("a"), py::arg("b"));
    m.def("mode_coverage", [](const Array& cloud, const Array& centers) {
        return mode_coverage(to_dataset(cloud), to_dataset(centers));
    }, py::arg("cloud"), py::arg("centers"));

    m.def("sigma_profile", [](const std::string& scheme, double t) { return sigma_profile(parse_scheme(scheme), t); },
          py::arg("scheme"), py::arg("t"), "scheme as on the command line: ve, vp:10, smld, ddpm, ...");
}
