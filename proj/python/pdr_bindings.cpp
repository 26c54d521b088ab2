// Python module `pdr._pdr`: numpy in, numpy out. Commands exchange JSON text,
// which the Python package turns into dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "pdr/ad/parallel.hpp"
#include "pdr/app/checkpoint.hpp"
#include "pdr/app/commands.hpp"
#include "pdr/eval/clustering.hpp"
#include "pdr/eval/disentangle.hpp"
#include "pdr/eval/metrics.hpp"
#include "pdr/eval/probe.hpp"
#include "pdr/io/pdrt.hpp"
#include "pdr/render/renderer.hpp"
#include "pdr/scene/generator.hpp"

namespace py = pybind11;
using namespace pdr;

namespace {

using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

template <class T>
py::array_t<T> to_numpy(const ad::Tensor<T>& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<T> out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

template <class T, class A>
ad::Tensor<T> from_numpy(const A& a) {
  ad::Shape shape(a.shape(), a.shape() + a.ndim());
  return ad::Tensor<T>::from(std::move(shape), std::vector<T>(a.data(), a.data() + a.size()));
}

// Accepts one scene ([H,W], [H,W,3], [4], [6]) or a batch (leading N).
ad::Tensor<double> batched(const F64Array& a, py::ssize_t unbatched_rank) {
  auto t = from_numpy<double>(a);
  if (a.ndim() == unbatched_rank) {
    ad::Shape s{1};
    s.insert(s.end(), t.shape().begin(), t.shape().end());
    t = ad::Tensor<double>::from(std::move(s), std::vector<double>(t.data().begin(), t.data().end()));
  }
  return t;
}

std::vector<int> to_ints(const IntArray& a) { return {a.data(), a.data() + a.size()}; }

eval::Matrix to_matrix(const F64Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  eval::Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.values.begin());
  return m;
}

py::dict scene_dict(const SceneParams<double>& p) {
  py::dict d;
  d["depth"] = to_numpy(p.depth);
  d["albedo"] = to_numpy(p.albedo);
  d["light"] = to_numpy(p.light);
  d["camera"] = to_numpy(p.camera);
  return d;
}

app::ExperimentConfig config_from(const std::string& json_text) {
  return json_text.empty() ? app::ExperimentConfig{} : app::config_from_json(io::Json::parse(json_text));
}

// Runs a command with the GIL released; returns (summary JSON, log text).
template <class F>
std::pair<std::string, std::string> run_command(F&& f) {
  std::ostringstream log;
  io::Json summary;
  {
    py::gil_scoped_release release;
    summary = f(log);
  }
  return {summary.dump(), log.str()};
}

class Model {
 public:
  explicit Model(const std::filesystem::path& checkpoint)
      : ckpt_(app::load_checkpoint(checkpoint)), model_(app::load_model(ckpt_)) {}

  py::dict encode(const F32Array& images) const {
    if (images.ndim() != 4) throw std::invalid_argument("images must be [N,H,W,3]");
    const auto z = eval::encode_all(model_, from_numpy<float>(images));
    py::dict out;
    for (auto b : nets::kAllBlocks) out[py::str(std::string(nets::block_name(b)))] = to_numpy(z[b]);
    return out;
  }

  py::dict decode_images(const F32Array& images) const {
    ad::NoGradGuard no_grad;
    const auto p = model_.decode(model_.encode(from_numpy<float>(images)));
    py::dict d;
    d["depth"] = to_numpy(p.depth);
    d["albedo"] = to_numpy(p.albedo);
    d["light"] = to_numpy(p.light);
    d["camera"] = to_numpy(p.camera);
    return d;
  }

  std::string config_json() const { return app::to_json(ckpt_.config).dump(); }
  int epoch() const { return ckpt_.epoch; }
  std::int64_t parameter_count() const { return model_.parameter_count(); }

 private:
  app::Checkpoint ckpt_;
  nets::InverseRenderer<float> model_;
};

}  // namespace

PYBIND11_MODULE(_pdr, m) {
  m.doc() = "Inverse-rendering representation learning: native core";

  m.def("set_num_threads", &ad::set_num_threads, py::arg("threads"));
  m.def("num_threads", &ad::num_threads);

  m.def(
      "generate_scene",
      [](std::uint64_t seed, int shape_class, int albedo_class, std::int64_t image_size) {
        scene::GeneratorConfig cfg;
        cfg.image_size = image_size;
        const auto s = scene::generate_scene<double>(seed, shape_class, albedo_class, cfg);
        auto d = scene_dict(s.params);
        d["image"] = to_numpy(s.image);
        d["shape_class"] = s.shape_class;
        d["albedo_class"] = s.albedo_class;
        return d;
      },
      py::arg("seed"), py::arg("shape_class"), py::arg("albedo_class"), py::arg("image_size") = 64,
      "One synthetic scene (batch of one) with its ground-truth parameters.");

  m.def(
      "render",
      [](const F64Array& depth, const F64Array& albedo, const F64Array& light, const F64Array& camera,
         double fov_degrees) {
        SceneParams<double> p;
        p.depth = batched(depth, 2);
        p.albedo = batched(albedo, 3);
        p.light = batched(light, 1);
        p.camera = batched(camera, 1);
        render::Renderer r;
        r.intrinsics = render::CameraIntrinsics::from_fov(p.depth.dim(1), fov_degrees);
        ad::NoGradGuard no_grad;
        return to_numpy(r(p));
      },
      py::arg("depth"), py::arg("albedo"), py::arg("light"), py::arg("camera"), py::arg("fov_degrees") = 30.0,
      "Renders [N,H,W,3] in [0,1]; unbatched inputs are treated as N=1.");

  m.def(
      "load_tensor",
      [](const std::filesystem::path& path) -> py::object {
        const auto raw = io::decode_pdrt(io::read_bytes(path));
        if (raw.dtype() == io::DType::f32) return to_numpy(ad::Tensor<float>::from(raw.shape, raw.as<float>()));
        return to_numpy(ad::Tensor<double>::from(raw.shape, raw.as<double>()));
      },
      py::arg("path"));
  m.def(
      "save_tensor", [](const std::filesystem::path& path, const F64Array& a) { io::save_tensor(path, from_numpy<double>(a)); },
      py::arg("path"), py::arg("array"));

  m.def(
      "cluster_accuracy", [](const IntArray& a, const IntArray& l) { return eval::cluster_accuracy(to_ints(a), to_ints(l)); },
      py::arg("assignments"), py::arg("labels"));
  m.def(
      "weighted_f1", [](const IntArray& a, const IntArray& l) { return eval::weighted_f1(to_ints(a), to_ints(l)); },
      py::arg("assignments"), py::arg("labels"));
  m.def(
      "nmi", [](const IntArray& a, const IntArray& l) { return eval::nmi(to_ints(a), to_ints(l)); },
      py::arg("assignments"), py::arg("labels"));
  m.def(
      "hac_ward",
      [](const F64Array& x, int k) {
        const auto r = eval::hac_ward(to_matrix(x), k);
        return py::array_t<int>(static_cast<py::ssize_t>(r.assignments.size()), r.assignments.data());
      },
      py::arg("x"), py::arg("k"), "Ward-linkage cluster ids for the rows of x.");
  m.def(
      "pcc_disentanglement",
      [](const std::vector<F64Array>& blocks) {
        if (blocks.size() != 4) throw std::invalid_argument("expected four feature blocks");
        std::array<eval::Matrix, 4> mats;
        for (std::size_t b = 0; b < 4; ++b) mats[b] = to_matrix(blocks[b]);
        const auto r = eval::pcc_disentanglement(mats);
        py::array_t<double> matrix({4, 4});
        auto v = matrix.mutable_unchecked<2>();
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) v(i, j) = r.matrix[i][j].value_or(std::numeric_limits<double>::quiet_NaN());
        return py::make_tuple(matrix, r.mean_off_diagonal.value_or(std::numeric_limits<double>::quiet_NaN()));
      },
      py::arg("blocks"), "(4x4 matrix of mean |r|, mean off-diagonal); NaN where a block has no variance.");

  py::class_<Model>(m, "Model")
      .def(py::init<const std::filesystem::path&>(), py::arg("checkpoint"))
      .def("encode", &Model::encode, py::arg("images"), "Feature blocks {geom, alb, cam, light}, each [N,F].")
      .def("decode_images", &Model::decode_images, py::arg("images"), "Predicted scene parameters.")
      .def_property_readonly("config_json", &Model::config_json)
      .def_property_readonly("epoch", &Model::epoch)
      .def_property_readonly("parameter_count", &Model::parameter_count);

  m.def("default_config_json", [] { return app::to_json(app::ExperimentConfig{}).dump(); });
  m.def(
      "cmd_generate",
      [](const std::string& config_json, const std::filesystem::path& out) {
        const auto cfg = config_from(config_json);
        return run_command([&](std::ostream& log) { return app::cmd_generate(cfg, out, log); });
      },
      py::arg("config_json"), py::arg("out"));
  m.def(
      "cmd_train",
      [](const std::string& config_json, const std::filesystem::path& dataset, const std::filesystem::path& out,
         std::optional<std::string> mode, std::optional<int> max_epochs, bool resume) {
        app::TrainOptions o;
        o.dataset = dataset;
        o.out = out;
        if (mode) o.mode = loocc::parse_mode(*mode);
        o.max_epochs = max_epochs;
        o.resume = resume;
        const auto cfg = config_from(config_json);
        return run_command([&](std::ostream& log) { return app::cmd_train(cfg, o, log); });
      },
      py::arg("config_json"), py::arg("dataset"), py::arg("out"), py::arg("mode") = py::none(),
      py::arg("max_epochs") = py::none(), py::arg("resume") = false);
  m.def(
      "cmd_eval",
      [](const std::filesystem::path& checkpoint, const std::filesystem::path& dataset, const std::string& task,
         std::optional<std::string> blocks, const std::string& label, const std::string& split,
         std::optional<std::int64_t> n_train, const std::string& probe_mode, bool baseline) {
        app::EvalOptions o;
        o.checkpoint = checkpoint;
        o.dataset = dataset;
        o.task = task;
        o.blocks = blocks;
        o.label = label;
        o.split = split;
        o.n_train = n_train;
        o.probe_mode = eval::parse_probe_mode(probe_mode);
        o.baseline = baseline;
        return run_command([&](std::ostream& log) { return app::cmd_eval(o, log); });
      },
      py::arg("checkpoint"), py::arg("dataset"), py::arg("task"), py::arg("blocks") = py::none(),
      py::arg("label") = "shape", py::arg("split") = "test", py::arg("n_train") = py::none(),
      py::arg("probe_mode") = "frozen", py::arg("baseline") = false);

  py::register_exception<app::UsageError>(m, "UsageError", PyExc_ValueError);
}
