// Python surface of the laboratory: family builders, dimension/pressure/
// cover queries, coding, and the deterministic RNG streams. The heavy
// machinery (scans, density integrals, jet systems) stays behind the CLI;
// this module covers interactive exploration and smoke testing.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fractlab/affine_ifs.hpp"
#include "fractlab/jets.hpp"
#include "fractlab/measure_lab.hpp"
#include "fractlab/rng.hpp"
#include "fractlab/skewprod.hpp"
#include "fractlab/symbolic.hpp"
#include "fractlab/thermo.hpp"

namespace py = pybind11;
namespace fl = fractlab;
using Vec = std::vector<double>;

namespace {

fl::symbolic::TailedWord backward_word(const std::vector<int>& letters, int tail_letter) {
    return fl::symbolic::TailedWord{
        fl::symbolic::Word(letters, fl::symbolic::Orientation::Backward),
        fl::symbolic::TailKind::Constant, tail_letter};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Numerical laboratory for parameterized contracting interval systems";

    py::class_<fl::affine::AffineIfsFamily>(m, "AffineFamily",
                                            "Parameterized family of affine contractions of "
                                            "[-1, 1]; build via the static factories.")
        .def_static(
            "uniform", [](int k, double c) { return fl::affine::build_uniform_family(k, c); },
            py::arg("letters"), py::arg("c"),
            "Equal-slope branches with equally spaced fixed points.")
        .def_static(
            "cantor", [](int k, double c) { return fl::affine::build_uniform_cantor(k, c); },
            py::arg("letters"), py::arg("c"),
            "Uniform family restricted to c < 1/(letters+1), guaranteeing gaps.")
        .def_static(
            "section4", [](int n, double c) { return fl::affine::build_section4_example(n, c); },
            py::arg("n"), py::arg("c"),
            "n+1 branches of slope c: n pinned plus one branch translated by the parameter.")
        .def_property_readonly(
            "letters",
            [](const fl::affine::AffineIfsFamily& f) { return f.alphabet().size; })
        .def_property_readonly("param_box", &fl::affine::AffineIfsFamily::param_box)
        .def(
            "dimension",
            [](const fl::affine::AffineIfsFamily& f, const Vec& p, double tolerance) {
                fl::thermo::DimensionOptions options;
                options.tolerance = tolerance;
                return fl::thermo::similarity_dimension(f, p, options).dimension;
            },
            py::arg("p"), py::arg("tolerance") = 1e-9,
            "Similarity dimension: the root of the pressure in the exponent s.")
        .def(
            "pressure",
            [](const fl::affine::AffineIfsFamily& f, const Vec& p, int depth, double s) {
                return fl::thermo::pressure_at_depth(fl::thermo::lambda_table(f, p, depth), s);
            },
            py::arg("p"), py::arg("depth"), py::arg("s"),
            "Depth-n pressure log(sum of contraction factors^s) / n.")
        .def(
            "cover_measure",
            [](const fl::affine::AffineIfsFamily& f, const Vec& p, const std::vector<int>& depths) {
                return fl::measure::cover_measure(f, p, depths).measure;
            },
            py::arg("p"), py::arg("depths"),
            "Lebesgue measure of the depth-n image unions (upper estimates).")
        .def(
            "code_point",
            [](const fl::affine::AffineIfsFamily& f, const Vec& p, const std::vector<int>& letters,
               int depth, int tail_letter) {
                return f.code_point(p, backward_word(letters, tail_letter), depth).value;
            },
            py::arg("p"), py::arg("letters"), py::arg("depth") = 60, py::arg("tail_letter") = 0,
            "Coded point of a backward address (letters[0] deepest) with a constant tail.")
        .def(
            "log_contraction",
            [](const fl::affine::AffineIfsFamily& f, const Vec& p, const std::vector<int>& letters) {
                return f.log_lambda(p, std::span<const int>(letters));
            },
            py::arg("p"), py::arg("letters"),
            "log of the contraction factor accumulated along a word.");

    m.def("uniform_dimension", &fl::thermo::uniform_dimension, py::arg("letters"),
          py::arg("ratio"), "Closed-form dimension log(letters) / -log(ratio).");

    m.def("jet_dimension", &fl::jets::jet_dimension, py::arg("d"), py::arg("s"),
          "Number of raw jet coordinates: multi-indices over d parameters of degree <= s.");

    m.def(
        "blender_summary",
        [](int n, int d, int s) {
            fl::skew::Section3Spec spec;
            spec.n = n;
            spec.d = d;
            spec.s = s;
            const auto blender = fl::skew::build_section3_blender(spec);
            py::dict out;
            out["branch_count"] = blender.branch_count;
            out["base_entropy"] = blender.base_entropy;
            out["fiber_contraction_log"] = blender.fiber_contraction_log;
            out["vertical_fiber_dim"] = blender.vertical.fiber_dim;
            out["vertical_letters"] = blender.vertical.alphabet.size;
            return out;
        },
        py::arg("n") = 2, py::arg("d") = 1, py::arg("s") = 0,
        "Expanding-base demo: branch count, entropy, and contraction summary.");

    m.def(
        "rng_stream",
        [](std::uint64_t seed, std::uint64_t stream, std::uint64_t index, int count) {
            auto rng = fl::Rng::derive(seed, stream, index);
            Vec out;
            out.reserve(std::size_t(count));
            for (int i = 0; i < count; ++i) out.push_back(rng.next_unit());
            return out;
        },
        py::arg("seed"), py::arg("stream"), py::arg("index") = 0, py::arg("count") = 1,
        "Deterministic uniform [0,1) draws from the counter-based generator.");
}
