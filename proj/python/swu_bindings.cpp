#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swu/metrics.hpp"
#include "swu/structures.hpp"
#include "swu/uncertainty.hpp"

namespace py = pybind11;
using namespace swu;

namespace {

using FloatArray = py::array_t<float, py::array::c_style>;

void require_dtype(const py::array& a, const py::dtype& want, const char* what) {
  if (!a.dtype().is(want)) {
    throw py::type_error(std::string(what) + " must have dtype " + py::str(want).cast<std::string>() + ", got " +
                         py::str(a.dtype()).cast<std::string>());
  }
}

Shape shape3(const py::array& a, const char* what) {
  if (a.ndim() != 3) {
    throw py::value_error(std::string(what) + " must be 3-D (z, y, x), got " + std::to_string(a.ndim()) + "-D");
  }
  return {a.shape(0), a.shape(1), a.shape(2)};
}

ScalarVolume to_volume(const py::array& a, const char* what = "volume") {
  require_dtype(a, py::dtype::of<float>(), what);
  const Shape s = shape3(a, what);
  const auto c = FloatArray::ensure(a);
  return ScalarVolume(s, kUnitSpacing, std::vector<float>(c.data(), c.data() + c.size()));
}

BinaryMask to_mask(const py::array& a, const char* what = "mask") {
  if (!a.dtype().is(py::dtype::of<bool>()) && !a.dtype().is(py::dtype::of<std::uint8_t>())) {
    throw py::type_error(std::string(what) + " must have dtype bool or uint8, got " +
                         py::str(a.dtype()).cast<std::string>());
  }
  const Shape s = shape3(a, what);
  const auto c = py::array_t<std::uint8_t, py::array::c_style>::ensure(a.attr("view")("uint8"));
  return BinaryMask(s, kUnitSpacing, std::vector<std::uint8_t>(c.data(), c.data() + c.size()));
}

EnsembleCase to_ensemble(const py::array& a) {
  require_dtype(a, py::dtype::of<float>(), "members");
  if (a.ndim() != 4) throw py::value_error("members must be 4-D (T, z, y, x), got " + std::to_string(a.ndim()) + "-D");
  const auto c = FloatArray::ensure(a);
  const Shape s{a.shape(1), a.shape(2), a.shape(3)};
  const auto n = static_cast<std::size_t>(s.voxels());
  std::vector<ScalarVolume> members;
  for (py::ssize_t t = 0; t < a.shape(0); ++t) {
    const float* p = c.data() + static_cast<std::size_t>(t) * n;
    members.emplace_back(s, kUnitSpacing, std::vector<float>(p, p + n));
  }
  return EnsembleCase("array", std::move(members));
}

FloatArray to_array(const ScalarVolume& v) {
  const Shape& s = v.shape();
  FloatArray out({s.z, s.y, s.x});
  std::copy(v.data().begin(), v.data().end(), out.mutable_data());
  return out;
}

Structure structure_from_mask(const py::array& a) {
  const BinaryMask m = to_mask(a, "structure");
  Structure s;
  s.label = 1;
  s.grid = m.shape();
  for (std::int64_t i = 0; i < m.size(); ++i) {
    if (m[i]) s.voxels.push_back(i);
  }
  if (s.voxels.empty()) throw py::value_error("structure mask is empty");
  s.bbox = {s.grid.coord(s.voxels.front()), s.grid.coord(s.voxels.front())};
  for (std::int64_t v : s.voxels) {
    const Index3 c = s.grid.coord(v);
    s.bbox.min = {std::min(s.bbox.min.z, c.z), std::min(s.bbox.min.y, c.y), std::min(s.bbox.min.x, c.x)};
    s.bbox.max = {std::max(s.bbox.max.z, c.z), std::max(s.bbox.max.y, c.y), std::max(s.bbox.max.x, c.x)};
  }
  return s;
}

Orientation parse_orientation(const std::string& text) {
  if (text == "confidence") return Orientation::Confidence;
  if (text == "uncertainty") return Orientation::Uncertainty;
  throw py::value_error("orientation must be 'confidence' or 'uncertainty', got '" + text + "'");
}

std::vector<double> to_doubles(const py::array& a, const char* what) {
  if (a.ndim() != 1) throw py::value_error(std::string(what) + " must be 1-D");
  const auto c = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(a);
  return {c.data(), c.data() + c.size()};
}

}  // namespace

PYBIND11_MODULE(_swu, m) {
  m.doc() = "Structure-wise uncertainty kernels and evaluation metrics";

  py::register_exception<Error>(m, "SwuError", PyExc_ValueError);

  m.def("binary_entropy", &binary_entropy, py::arg("p"));
  m.def("logit", &logit, py::arg("p"));

  m.def("mean_prediction", [](const py::array& members) { return to_array(mean_prediction(to_ensemble(members))); },
        py::arg("members"));
  m.def("entropy_map", [](const py::array& p) { return to_array(entropy_map(to_volume(p, "prob"))); }, py::arg("prob"));
  m.def("average_entropy_map",
        [](const py::array& members) { return to_array(average_entropy_map(to_ensemble(members))); },
        py::arg("members"));
  m.def("mutual_information_map",
        [](const py::array& members) { return to_array(mutual_information_map(to_ensemble(members))); },
        py::arg("members"));
  m.def("variance_map", [](const py::array& members) { return to_array(variance_map(to_ensemble(members))); },
        py::arg("members"));

  m.def(
      "connected_components",
      [](const py::array& mask, int connectivity) {
        const LabelVolume l = label_components(to_mask(mask), parse_connectivity(connectivity));
        py::array_t<std::int32_t> out({l.shape.z, l.shape.y, l.shape.x});
        std::copy(l.labels.begin(), l.labels.end(), out.mutable_data());
        return out;
      },
      py::arg("mask"), py::arg("connectivity") = 26, "Label array: 0 background, 1..n in row-major first-voxel order.");

  m.def(
      "aggregate",
      [](const py::array& map, const py::array& structure, const std::string& aggregation) {
        return aggregate(to_volume(map, "map"), structure_from_mask(structure), parse_aggregation(aggregation));
      },
      py::arg("map"), py::arg("structure"), py::arg("aggregation") = "mean");

  m.def(
      "pairwise_dice_score",
      [](const py::array& members, const py::array& structure, double threshold, int connectivity) {
        return pairwise_dice_score(to_ensemble(members), structure_from_mask(structure), threshold,
                                   parse_connectivity(connectivity));
      },
      py::arg("members"), py::arg("structure"), py::arg("threshold") = 0.5, py::arg("connectivity") = 26);

  py::class_<FrocCurve>(m, "FrocCurve")
      .def_readonly("total_gt", &FrocCurve::total_gt)
      .def_readonly("n_cases", &FrocCurve::n_cases)
      .def_property_readonly("orientation", [](const FrocCurve& c) { return std::string(to_string(c.orientation)); })
      .def_property_readonly("threshold",
                             [](const FrocCurve& c) {
                               std::vector<double> v;
                               for (const auto& p : c.points) v.push_back(p.threshold);
                               return v;
                             })
      .def_property_readonly("recall",
                             [](const FrocCurve& c) {
                               std::vector<double> v;
                               for (const auto& p : c.points) v.push_back(p.recall);
                               return v;
                             })
      .def_property_readonly("avg_fp",
                             [](const FrocCurve& c) {
                               std::vector<double> v;
                               for (const auto& p : c.points) v.push_back(p.avg_fp);
                               return v;
                             })
      .def_property_readonly("precision",
                             [](const FrocCurve& c) {
                               std::vector<double> v;
                               for (const auto& p : c.points)
                                 v.push_back(p.precision.value_or(std::numeric_limits<double>::quiet_NaN()));
                               return v;
                             })
      .def("__len__", [](const FrocCurve& c) { return c.points.size(); });

  m.def(
      "froc_curve",
      [](const py::array& scores, const py::array& is_tp, const py::array& gt_keys, const std::string& orientation,
         std::int64_t total_gt, int n_cases) {
        const auto s = to_doubles(scores, "scores");
        const auto tp = to_doubles(is_tp, "is_tp");
        const auto keys = to_doubles(gt_keys, "gt_keys");
        if (tp.size() != s.size() || keys.size() != s.size()) {
          throw py::value_error("scores, is_tp and gt_keys must have equal length");
        }
        std::vector<Detection> d(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
          d[i] = {s[i], tp[i] != 0.0, tp[i] != 0.0 ? static_cast<std::int64_t>(keys[i]) : -1};
        }
        return froc_curve(d, parse_orientation(orientation), total_gt, n_cases);
      },
      py::arg("scores"), py::arg("is_tp"), py::arg("gt_keys"), py::arg("orientation"), py::arg("total_gt"),
      py::arg("n_cases"));

  m.def(
      "fp_reduction", [](const FrocCurve& c) { return fp_reduction(c).value; }, py::arg("curve"),
      "None when the curve has no false positives to reduce.");
  m.def(
      "average_recall",
      [](const FrocCurve& c, std::optional<std::pair<double, double>> band) {
        return band ? average_recall(c, PrecisionBand{band->first, band->second}) : average_recall(c);
      },
      py::arg("curve"), py::arg("band") = py::none());
  m.def(
      "spearman_abs",
      [](const py::array& a, const py::array& b) { return spearman_abs(to_doubles(a, "a"), to_doubles(b, "b")); },
      py::arg("a"), py::arg("b"));
}
