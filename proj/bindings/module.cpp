#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dynmap/expert/ppo.hpp"
#include "dynmap/expert/recorder.hpp"
#include "dynmap/harness/eval.hpp"
#include "dynmap/harness/train.hpp"
#include "dynmap/render/render.hpp"
#include "dynmap/wm/rollout.hpp"

namespace py = pybind11;
using namespace dynmap;

namespace {

py::array_t<uint8_t> image_array(const std::vector<uint8_t>& rgb) {
    py::array_t<uint8_t> arr({render::kImageSize, render::kImageSize, 3});
    std::memcpy(arr.mutable_data(), rgb.data(), rgb.size());
    return arr;
}

py::array_t<double> to_array(const std::array<double, 6>& a) {
    py::array_t<double> arr(6);
    std::memcpy(arr.mutable_data(), a.data(), sizeof(a));
    return arr;
}

}  // namespace

PYBIND11_MODULE(_dynmap, m) {
    m.doc() = "Dynamics-informed world models for cart/block manipulation";

    py::register_exception<tasks::ConfigurationError>(m, "ConfigurationError");
    py::register_exception<harness::CorruptFile>(m, "CorruptFile");
    py::register_exception<sim::SimulationDiverged>(m, "SimulationDiverged");

    py::enum_<tasks::TaskId>(m, "TaskId")
        .value("BALANCE_REACHING", tasks::TaskId::BalanceReaching)
        .value("BALANCE_REACHING_V2", tasks::TaskId::BalanceReachingV2)
        .value("BIN_DROPPING", tasks::TaskId::BinDropping);

    py::class_<tasks::RandomizationSpec>(m, "RandomizationSpec")
        .def(py::init<>())
        .def("reduced", &tasks::RandomizationSpec::reduced, py::arg("scale"))
        .def_readwrite("rng_seed", &tasks::RandomizationSpec::rng_seed);

    py::class_<tasks::EpisodeConfig>(m, "EpisodeConfig")
        .def_readonly("task", &tasks::EpisodeConfig::task)
        .def_readonly("cart_width", &tasks::EpisodeConfig::cart_width)
        .def_readonly("block_height", &tasks::EpisodeConfig::block_height)
        .def_readonly("max_steps", &tasks::EpisodeConfig::max_steps)
        .def_property_readonly("cart_start",
                               [](const tasks::EpisodeConfig& c) {
                                   return py::make_tuple(c.cart_start.x, c.cart_start.y);
                               })
        .def_property_readonly("goal",
                               [](const tasks::EpisodeConfig& c) {
                                   return py::make_tuple(c.goal.g.x, c.goal.g.y);
                               })
        .def("digest", &tasks::EpisodeConfig::digest);

    m.def(
        "sample_episode",
        [](tasks::TaskId task, const tasks::RandomizationSpec& spec, uint64_t seed) {
            Rng rng(seed);
            return tasks::sample_episode(task, spec, rng);
        },
        py::arg("task"), py::arg("spec"), py::arg("seed"));

    py::class_<tasks::Outcome>(m, "Outcome")
        .def_readonly("dropped", &tasks::Outcome::dropped)
        .def_readonly("success", &tasks::Outcome::success)
        .def_property_readonly("position_error_mm", [](const tasks::Outcome& o) -> py::object {
            if (!o.position_error_mm) return py::none();
            return py::float_(*o.position_error_mm);
        });

    // Gym-style 20 Hz state-space environment.
    py::class_<expert::ControlEnv>(m, "ControlEnv")
        .def(py::init([](tasks::TaskId task, const tasks::RandomizationSpec& spec) {
                 return expert::ControlEnv(task, spec);
             }),
             py::arg("task"), py::arg("spec") = tasks::RandomizationSpec{})
        .def(
            "reset",
            [](expert::ControlEnv& env, uint64_t seed) {
                Rng rng(seed);
                return env.reset(rng);
            },
            py::arg("seed"))
        .def("reset_to", &expert::ControlEnv::reset_to, py::arg("config"))
        .def(
            "step",
            [](expert::ControlEnv& env, const std::array<double, 3>& action) {
                const auto res = env.step(action);
                return py::make_tuple(res.obs, res.reward, res.done);
            },
            py::arg("action"))
        .def_property_readonly("config", &expert::ControlEnv::config)
        .def_property_readonly("dropped", &expert::ControlEnv::dropped)
        .def_property_readonly("steps", &expert::ControlEnv::steps)
        .def("render", [](const expert::ControlEnv& env) {
            const render::Image64 img = render::render_frame(env.world(), env.config());
            return image_array({img.px.begin(), img.px.end()});
        });

    py::class_<harness::Trajectory>(m, "Trajectory")
        .def_readonly("config", &harness::Trajectory::config)
        .def("__len__", [](const harness::Trajectory& t) { return t.steps.size(); })
        .def("image", [](const harness::Trajectory& t, size_t i) {
            return image_array(t.steps.at(i).image);
        })
        .def("positions",
             [](const harness::Trajectory& t, size_t i) { return to_array(t.steps.at(i).dynamics.p); })
        .def("velocities",
             [](const harness::Trajectory& t, size_t i) { return to_array(t.steps.at(i).dynamics.v); })
        .def("accelerations",
             [](const harness::Trajectory& t, size_t i) { return to_array(t.steps.at(i).dynamics.a); })
        .def("action", [](const harness::Trajectory& t, size_t i) { return t.steps.at(i).action_norm; })
        .def("abs_command",
             [](const harness::Trajectory& t, size_t i) { return t.steps.at(i).abs_command; });

    m.def("read_trajectory", &harness::read_trajectory, py::arg("path"));
    m.def(
        "validate_dataset",
        [](const std::string& dir) {
            const auto rep = harness::validate_dataset(dir);
            return py::make_tuple(rep.ok, rep.issues);
        },
        py::arg("dir"));
    m.def(
        "record_dataset",
        [](const std::string& out_dir, tasks::TaskId task, const tasks::RandomizationSpec& spec,
           int n_train, int n_eval, uint64_t seed) {
            expert::ScriptedExpert scripted;
            expert::RecorderConfig rc;
            rc.out_dir = out_dir;
            rc.n_train = n_train;
            rc.n_eval = n_eval;
            const auto manifest = expert::record_dataset({&scripted}, task, spec, rc, seed);
            return manifest.dataset_hash;
        },
        py::arg("out_dir"), py::arg("task"), py::arg("spec"), py::arg("n_train"), py::arg("n_eval"),
        py::arg("seed"));

    py::class_<harness::Metrics>(m, "Metrics")
        .def_readonly("dr_mean", &harness::Metrics::dr_mean)
        .def_readonly("dr_std", &harness::Metrics::dr_std)
        .def_readonly("pe_mean", &harness::Metrics::pe_mean)
        .def_readonly("pe_std", &harness::Metrics::pe_std)
        .def_readonly("sr_mean", &harness::Metrics::sr_mean)
        .def_readonly("sr_std", &harness::Metrics::sr_std);

    m.def("evaluate", &harness::evaluate, py::arg("checkpoint_paths"), py::arg("dataset_dir"),
          py::arg("n_episodes") = 0, py::arg("episode_csv") = "", py::arg("error_csv") = "");

    m.def(
        "train",
        [](const std::string& regime, const std::string& dataset_dir,
           const std::string& out_checkpoint, int epochs, int window, int batch_size,
           uint64_t seed, float w_p, float w_v, float w_a, const std::string& policy,
           const std::string& wm_checkpoint, int z_dim, int hidden) {
            harness::TrainConfig cfg;
            cfg.regime = harness::regime_from_name(regime);
            cfg.dataset_dir = dataset_dir;
            cfg.out_checkpoint = out_checkpoint;
            cfg.epochs = epochs;
            cfg.window = window;
            cfg.batch_size = batch_size;
            cfg.seed = seed;
            cfg.weights.w_p = w_p;
            cfg.weights.w_v = w_v;
            cfg.weights.w_a = w_a;
            cfg.model.z_dim = z_dim;
            cfg.model.hidden = hidden;
            cfg.model.policy = policy == "recurrent" ? wm::PolicyVariant::Recurrent
                                                     : wm::PolicyVariant::Feedforward;
            cfg.wm_checkpoint = wm_checkpoint;
            harness::TrainResult res;
            switch (cfg.regime) {
                case harness::Regime::DecoupledWm: res = harness::train_decoupled_wm(cfg); break;
                case harness::Regime::DecoupledPolicy: res = harness::train_policy_frozen(cfg); break;
                case harness::Regime::Joint: res = harness::train_joint(cfg); break;
                case harness::Regime::E2E: res = harness::train_e2e(cfg); break;
            }
            py::list losses;
            for (const auto& e : res.epochs) losses.append(e.total);
            return losses;
        },
        py::arg("regime"), py::arg("dataset_dir"), py::arg("out_checkpoint"), py::arg("epochs"),
        py::arg("window") = 0, py::arg("batch_size") = 8, py::arg("seed") = 0,
        py::arg("w_p") = 0.0f, py::arg("w_v") = 0.0f, py::arg("w_a") = 0.0f,
        py::arg("policy") = "feedforward", py::arg("wm_checkpoint") = "", py::arg("z_dim") = 64,
        py::arg("hidden") = 256);

    m.def(
        "rollout",
        [](const std::string& checkpoint, const std::string& dataset_dir, uint64_t episode_index) {
            wm::WorldModel model = wm::WorldModel::load(checkpoint);
            const auto manifest = harness::load_manifest(dataset_dir);
            const auto cfgs = harness::eval_configs(dataset_dir, 0);
            const auto& cfg = cfgs.at(episode_index);
            const auto res = wm::rollout_inference(model, cfg, manifest.norm_stats);
            return res.outcome;
        },
        py::arg("checkpoint"), py::arg("dataset_dir"), py::arg("episode_index") = 0);
}
