#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "foodcal/calibrate.hpp"
#include "foodcal/error.hpp"
#include "foodcal/eval.hpp"
#include "foodcal/ingest.hpp"
#include "foodcal/nutrition.hpp"
#include "foodcal/pipeline.hpp"
#include "foodcal/segment.hpp"
#include "foodcal/synth.hpp"

namespace py = pybind11;
using namespace foodcal;

namespace {

using ImageArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Image from_array(const ImageArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected an (H, W, 3) uint8 array");
  Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data().begin());
  return img;
}

ImageArray to_array(const Image& img) {
  ImageArray a({img.height(), img.width(), 3});
  std::copy(img.data().begin(), img.data().end(), a.mutable_data());
  return a;
}

py::array_t<std::uint8_t> mask_to_array(const Mask& m) {
  py::array_t<std::uint8_t> a({m.height(), m.width()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

Box to_box(const std::tuple<int, int, int, int>& t) {
  return {std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t)};
}

}  // namespace

PYBIND11_MODULE(_foodcal, m) {
  m.doc() = "Food volume and calorie estimation from a top and a side photo";

  static py::exception<Error> error_type(m, "FoodcalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    auto raise = [](const Error& e, py::object stage) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(py::str(e.what()));
      exc.attr("kind") = std::string(e.name());
      exc.attr("stage") = stage;
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    };
    try {
      if (p) std::rethrow_exception(p);
    } catch (const StageError& e) {
      raise(e, py::str(e.stage()));
    } catch (const Error& e) {
      raise(e, py::none());
    }
  });

  m.def("foods", [] {
    py::list out;
    const NutritionTable table = NutritionTable::builtin();
    for (const FoodSpec& f : table.foods()) {
      out.append(py::dict(py::arg("label") = f.label, py::arg("density_g_cm3") = f.density_g_cm3,
                          py::arg("energy_kcal_g") = f.energy_kcal_g,
                          py::arg("shape") = std::string(to_string(f.shape))));
    }
    return out;
  });

  m.def(
      "calories_from_volume",
      [](double volume_cm3, const std::string& label) {
        const CalorieResult r = calories_from_volume(volume_cm3, lookup(label));
        return py::dict(py::arg("volume_cm3") = r.volume_cm3, py::arg("mass_g") = r.mass_g,
                        py::arg("calories_kcal") = r.calories_kcal);
      },
      py::arg("volume_cm3"), py::arg("label"));

  m.def(
      "mean_error",
      [](const std::vector<std::tuple<std::string, std::string, double, double>>& rows) {
        std::vector<PairEstimate> v;
        for (const auto& [id, label, est, ref] : rows) v.push_back({id, normalize_label(label), est, ref});
        py::list out;
        for (const TypeReport& t : mean_error(v)) {
          out.append(py::dict(py::arg("food_label") = t.food_label, py::arg("n") = t.n,
                              py::arg("mean_error") = t.mean_error, py::arg("abs_mean_error") = t.abs_mean_error));
        }
        return out;
      },
      py::arg("estimates"), "estimates: [(pair_id, label, estimated_cm3, reference_cm3)]");

  m.def("load_image", [](const std::filesystem::path& p) { return to_array(load_image(p)); }, py::arg("path"));
  m.def("save_png", [](const std::filesystem::path& p, const ImageArray& a) { save_png(p, from_array(a)); },
        py::arg("path"), py::arg("image"));

  m.def(
      "detect_coin",
      [](const ImageArray& image, const std::tuple<int, int, int, int>& box, double min_support) {
        HoughOptions opts;
        opts.min_support = min_support;
        const CircleEstimate c = detect_coin(from_array(image), to_box(box), opts);
        return py::dict(py::arg("cx") = c.cx, py::arg("cy") = c.cy, py::arg("r") = c.r,
                        py::arg("support") = c.support, py::arg("cm_per_px") = scale_from_coin(c).cm_per_px);
      },
      py::arg("image"), py::arg("box"), py::arg("min_support") = 0.4);

  m.def(
      "grabcut",
      [](const ImageArray& image, const std::tuple<int, int, int, int>& box, int iters, double tol) {
        GrabCutOptions opts;
        opts.max_iters = iters;
        opts.rel_tol = tol;
        const Image img = from_array(image);
        const GrabCutResult r = grabcut_run(img, to_box(box), opts);
        return py::make_tuple(mask_to_array(r.mask), r.energies);
      },
      py::arg("image"), py::arg("box"), py::arg("iters") = 5, py::arg("tol") = 1e-3,
      "Returns (mask, energies).");

  m.def(
      "estimate_json",
      [](const std::filesystem::path& top, const std::filesystem::path& side, const std::filesystem::path& top_sidecar,
         const std::filesystem::path& side_sidecar, double score_threshold) {
        PipelineConfig config;
        config.score_threshold = score_threshold;
        const auto tp = sidecar_provider(top_sidecar, score_threshold);
        const auto sp = sidecar_provider(side_sidecar, score_threshold);
        const EstimateReport r =
            estimate_pair(load_image(top), load_image(side), *tp, *sp, PipelineTables::load(config), config);
        return report_to_json(r).dump();
      },
      py::arg("top"), py::arg("side"), py::arg("top_sidecar"), py::arg("side_sidecar"),
      py::arg("score_threshold") = kDefaultScoreThreshold);

  m.def(
      "evaluate_json",
      [](const std::filesystem::path& manifest, int jobs, const std::string& detector, bool timings) {
        PipelineConfig config;
        config.jobs = jobs;
        if (detector == "sidecar") {
          config.detector = DetectorKind::Sidecar;
        } else if (detector != "annotations") {
          throw py::value_error("detector must be 'annotations' or 'sidecar'");
        }
        EvaluationReport r;
        {
          py::gil_scoped_release release;
          r = evaluate_manifest(load_manifest_lenient(manifest), config);
        }
        return evaluation_to_json(r, timings).dump();
      },
      py::arg("manifest"), py::arg("jobs") = 1, py::arg("detector") = "annotations", py::arg("timings") = true);

  m.def(
      "write_synthetic_dataset",
      [](const std::filesystem::path& dir, int count, std::uint64_t seed) {
        return write_synthetic_dataset(dir, count, seed);
      },
      py::arg("directory"), py::arg("count") = 6, py::arg("seed") = 1);
}
