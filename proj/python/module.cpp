#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tamperformer/config.hpp"
#include "tamperformer/eval.hpp"
#include "tamperformer/metrics.hpp"

namespace py = pybind11;
using namespace tfm;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor tensor_from_2d(const DoubleArray& arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Tensor t({static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1))});
  std::copy(arr.data(), arr.data() + t.numel(), t.data.begin());
  return t;
}

py::array_t<double> array_from_tensor2d(const Tensor& t) {
  py::array_t<double> out({t.shape[0], t.shape[1]});
  std::copy(t.data.begin(), t.data.end(), out.mutable_data());
  return out;
}

Image image_from_array(const DoubleArray& arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 3)
    throw std::invalid_argument("expected an HxWx3 array with values in [0,1]");
  Image img(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)), 3);
  std::copy(arr.data(), arr.data() + img.data.size(), img.data.begin());
  return img;
}

class PyModel {
 public:
  static PyModel from_config(const std::map<std::string, std::string>& entries) {
    RunConfig rc;
    for (const auto& [k, v] : entries) rc.set(k, v);
    PyModel model;
    model.handle_.config = rc.model_config();
    model.handle_.weights = init_weights(model.handle_.config);
    return model;
  }

  static PyModel load(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    PyModel model;
    model.handle_.config = ckpt.config;
    model.handle_.weights = std::move(ckpt.weights);
    return model;
  }

  void save(const std::string& path) const {
    save_checkpoint(path, Checkpoint{handle_.config, handle_.weights, std::nullopt});
  }

  py::tuple predict(const DoubleArray& arr) const {
    PredictionOutput pred = predict_image(handle_, image_from_array(arr));
    return py::make_tuple(pred.label_score, array_from_tensor2d(pred.mask));
  }

  py::tuple predict_with_affinities(const DoubleArray& arr) const {
    Image img = image_from_array(arr);
    Image input = img;
    if (input.h != handle_.config.image_h || input.w != handle_.config.image_w)
      input = resize(input, handle_.config.image_h, handle_.config.image_w, ResizeFilter::Bilinear);
    PredictionOutput pred = forward(input, handle_.weights, handle_.config, true);
    py::list affinities;
    for (const auto& a : pred.affinities) {
      py::array_t<double> arr3({a.heads, a.objects, a.keys});
      std::copy(a.weights.data.begin(), a.weights.data.end(), arr3.mutable_data());
      affinities.append(std::move(arr3));
    }
    return py::make_tuple(pred.label_score, array_from_tensor2d(pred.mask), affinities);
  }

  std::map<std::string, std::string> config() const {
    const ModelConfig& c = handle_.config;
    return {{"model.image_size", std::to_string(c.image_h)},
            {"model.stem", stem_spec_to_string(c.stem)},
            {"model.prototypes", std::to_string(c.prototypes)},
            {"model.heads", std::to_string(c.heads)},
            {"model.depth", std::to_string(c.depth)},
            {"model.bcim_window", std::to_string(c.bcim_window)},
            {"model.alpha", std::to_string(c.alpha)},
            {"model.ffn_width", std::to_string(c.ffn_width)},
            {"model.lambda", std::to_string(c.lambda)},
            {"model.use_hfe", c.use_hfe ? "true" : "false"},
            {"model.use_bcim", c.use_bcim ? "true" : "false"},
            {"seed", std::to_string(c.seed)}};
  }

 private:
  ModelHandle handle_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Image manipulation detection and localization core";

  m.def("to_luminance", [](const DoubleArray& arr) {
    if (arr.ndim() != 3) throw std::invalid_argument("expected an HxWxC array");
    Image img(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
              static_cast<int>(arr.shape(2)));
    std::copy(arr.data(), arr.data() + img.data.size(), img.data.begin());
    return array_from_tensor2d(to_luminance(img));
  });

  m.def("dct2", [](const DoubleArray& arr) {
    return array_from_tensor2d(dct2(tensor_from_2d(arr)).coeffs);
  });

  m.def("idct2", [](const DoubleArray& arr) {
    Tensor coeffs = tensor_from_2d(arr);
    FrequencyGrid grid{coeffs.shape[0], coeffs.shape[1], std::move(coeffs)};
    return array_from_tensor2d(idct2(grid));
  });

  m.def("high_pass_mask", [](int h, int w, double alpha) {
    return array_from_tensor2d(high_pass_mask(h, w, HighPassSpec{alpha}));
  });

  m.def("extract_high_frequency", [](const DoubleArray& arr, double alpha) {
    Image xh = extract_high_frequency(image_from_array(arr), HighPassSpec{alpha});
    Tensor t({xh.h, xh.w});
    t.data = xh.data;
    return array_from_tensor2d(t);
  }, py::arg("image"), py::arg("alpha") = 0.1);

  m.def("sinusoidal_positions", [](int length, int width) {
    return array_from_tensor2d(sinusoidal_positions(length, width));
  });

  m.def("local_cosine_similarity", [](const DoubleArray& arr, int window) {
    if (arr.ndim() != 3) throw std::invalid_argument("expected an HxWxD array");
    Tensor grid({static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
                 static_cast<int>(arr.shape(2))});
    std::copy(arr.data(), arr.data() + grid.numel(), grid.data.begin());
    return array_from_tensor2d(local_cosine_similarity(grid, window).values);
  }, py::arg("grid"), py::arg("window") = 3);

  m.def("auc", &auc, py::arg("scores"), py::arg("labels"));
  m.def("eer_threshold", &eer_threshold, py::arg("scores"), py::arg("labels"));
  m.def("f1_at_threshold", &f1_at_threshold, py::arg("scores"), py::arg("labels"), py::arg("t"));

  m.def("generate_dataset",
        [](const std::string& out_dir, int n, int image_size, uint64_t seed,
           const std::string& mix, const std::string& source_dir, double degrade_prob,
           bool blend) {
          GenConfig cfg;
          cfg.out_dir = out_dir;
          cfg.n = n;
          cfg.image_size = image_size;
          cfg.seed = seed;
          cfg.mix = RunConfig::parse_mix(mix);
          cfg.source_dir = source_dir;
          cfg.degrade_prob = degrade_prob;
          cfg.blend = blend;
          return generate_dataset(cfg);
        },
        py::arg("out_dir"), py::arg("n") = 100, py::arg("image_size") = 64,
        py::arg("seed") = 42,
        py::arg("mix") = "pristine=0.25,copy_move=0.25,splice=0.25,removal=0.25",
        py::arg("source_dir") = "", py::arg("degrade_prob") = 0.25, py::arg("blend") = true);

  py::class_<PyModel>(m, "Model")
      .def_static("from_config", &PyModel::from_config, py::arg("config"))
      .def_static("load", &PyModel::load, py::arg("path"))
      .def("save", &PyModel::save, py::arg("path"))
      .def("predict", &PyModel::predict, py::arg("image"))
      .def("predict_with_affinities", &PyModel::predict_with_affinities, py::arg("image"))
      .def("config", &PyModel::config);
}
