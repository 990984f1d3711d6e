#include "dynmap/harness/train.hpp"

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "dynmap/core/hash.hpp"

namespace dynmap::harness {

namespace fs = std::filesystem;
using nn::Tensor;

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::DecoupledWm: return "decoupled_wm";
        case Regime::DecoupledPolicy: return "decoupled_policy";
        case Regime::Joint: return "joint";
        case Regime::E2E: return "e2e";
    }
    return "?";
}

Regime regime_from_name(const std::string& name) {
    for (Regime r : {Regime::DecoupledWm, Regime::DecoupledPolicy, Regime::Joint, Regime::E2E})
        if (name == regime_name(r)) return r;
    throw tasks::ConfigurationError("unknown training regime: " + name);
}

wm::SeqSample make_seq_sample(const Trajectory& traj, const tasks::NormStats& stats, int offset,
                              int window) {
    const int total = static_cast<int>(traj.steps.size());
    const int len = window > 0 ? std::min(window, total - offset) : total - offset;
    if (offset < 0 || len < 1) throw std::invalid_argument("bad sample window");

    tasks::NormStats scratch = stats;  // normalization mutates clamp counters
    wm::SeqSample s;
    s.images.reserve(static_cast<size_t>(len));
    for (int i = offset; i < offset + len; ++i) {
        const auto& rec = traj.steps[static_cast<size_t>(i)];
        s.images.push_back(wm::image_bytes_to_tensor(rec.image.data()));
        Tensor a({3});
        for (int d = 0; d < 3; ++d)
            a.v[static_cast<size_t>(d)] = static_cast<float>(rec.action_norm[static_cast<size_t>(d)]);
        s.actions.push_back(std::move(a));
        auto to_t = [](const std::array<double, 6>& x) {
            Tensor t({6});
            for (int d = 0; d < 6; ++d) t.v[static_cast<size_t>(d)] = static_cast<float>(x[static_cast<size_t>(d)]);
            return t;
        };
        s.p.push_back(to_t(tasks::normalize_p(rec.dynamics.p, scratch)));
        s.v.push_back(to_t(tasks::normalize_v(rec.dynamics.v, scratch)));
        s.a.push_back(to_t(tasks::normalize_a(rec.dynamics.a, scratch)));
    }
    const auto gn = traj.config.goal.normalized();
    s.goal = Tensor({2});
    s.goal.v[0] = static_cast<float>(gn[0]);
    s.goal.v[1] = static_cast<float>(gn[1]);
    return s;
}

namespace {

std::vector<std::string> split_paths(const std::string& dir, const std::vector<ManifestEntry>& es) {
    std::vector<std::string> out;
    out.reserve(es.size());
    for (const auto& e : es) out.push_back(dir + "/" + e.file);
    return out;
}

void append_csv(const std::string& path, int epoch, const wm::LossValues& v) {
    if (path.empty()) return;
    const bool fresh = !fs::exists(path);
    std::ofstream out(path, std::ios::app);
    if (fresh) out << "epoch,rgb,latent,dynamics,policy,total\n";
    out << epoch << ',' << v.rgb << ',' << v.latent << ',' << v.dynamics << ',' << v.policy << ','
        << v.total << '\n';
}

wm::WorldModel init_model(const TrainConfig& cfg) {
    if (!cfg.init_checkpoint.empty()) return wm::WorldModel::load(cfg.init_checkpoint);
    return wm::WorldModel(cfg.model, cfg.seed);
}

TrainResult run_batched_training(const TrainConfig& cfg, wm::Objective objective,
                                 std::vector<nn::Parameter*> opt_params, wm::WorldModel& model) {
    const DatasetManifest manifest = load_manifest(cfg.dataset_dir);
    const std::vector<std::string> files = split_paths(cfg.dataset_dir, manifest.train_files);
    if (files.empty()) throw tasks::ConfigurationError("dataset has no training trajectories");

    nn::AdamState adam(cfg.adam);
    Rng rng(cfg.seed ^ 0x7261696eull);
    if (!cfg.log_csv.empty() && fs::exists(cfg.log_csv)) fs::remove(cfg.log_csv);

    TrainResult result;
    std::vector<size_t> order(files.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);

        wm::LossValues sum;
        int windows = 0;
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(cfg.batch_size)) {
            const size_t end =
                std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
            const float inv = 1.0f / static_cast<float>(end - start);
            for (size_t k = start; k < end; ++k) {
                const Trajectory traj = read_trajectory(files[order[k]]);
                int offset = 0;
                if (cfg.window > 0 && static_cast<int>(traj.steps.size()) > cfg.window)
                    offset = static_cast<int>(
                        rng.uniform_index(traj.steps.size() - static_cast<size_t>(cfg.window) + 1));
                const wm::SeqSample sample =
                    make_seq_sample(traj, manifest.norm_stats, offset, cfg.window);
                try {
                    nn::Tape tape;
                    const wm::BuiltLoss built =
                        wm::build_window_loss(model, tape, sample, cfg.weights, objective);
                    tape.backward(tape.scale(built.loss_id, inv));
                    sum.rgb += built.values.rgb;
                    sum.latent += built.values.latent;
                    sum.dynamics += built.values.dynamics;
                    sum.policy += built.values.policy;
                    sum.total += built.values.total;
                    ++windows;
                } catch (const nn::NnError& e) {
                    throw std::runtime_error("training aborted at epoch " +
                                             std::to_string(epoch) + ", trajectory " +
                                             files[order[k]] + ": " + e.what());
                }
            }
            adam.step(opt_params);
        }
        wm::LossValues mean = sum;
        const float invw = 1.0f / static_cast<float>(std::max(1, windows));
        mean.rgb *= invw;
        mean.latent *= invw;
        mean.dynamics *= invw;
        mean.policy *= invw;
        mean.total *= invw;
        result.epochs.push_back(mean);
        append_csv(cfg.log_csv, epoch, mean);
    }
    if (!cfg.out_checkpoint.empty()) {
        model.save(cfg.out_checkpoint);
        result.checkpoint = cfg.out_checkpoint;
    }
    return result;
}

}  // namespace

TrainResult train_decoupled_wm(const TrainConfig& cfg) {
    wm::WorldModel model = init_model(cfg);
    return run_batched_training(cfg, wm::Objective::WorldModel, model.world_model_params(), model);
}

TrainResult train_joint(const TrainConfig& cfg) {
    wm::WorldModel model = init_model(cfg);
    return run_batched_training(cfg, wm::Objective::Joint, model.params().all(), model);
}

TrainResult train_e2e(const TrainConfig& cfg) {
    wm::WorldModel model = init_model(cfg);
    std::vector<nn::Parameter*> opt = model.group("phi");
    for (nn::Parameter* p : model.policy_params()) opt.push_back(p);
    return run_batched_training(cfg, wm::Objective::E2E, opt, model);
}

// ---- latent cache ----

std::string latent_cache_path(const std::string& cache_dir, const std::string& dataset_hash,
                              const std::string& checkpoint_hash) {
    return cache_dir + "/latents_" + dataset_hash + "_" + checkpoint_hash + ".bin";
}

namespace {

void put_u32v(std::vector<uint8_t>& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

uint32_t take_u32(const uint8_t*& p) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
}

void put_tensor(std::vector<uint8_t>& buf, const Tensor& t) {
    const size_t n = t.v.size() * 4;
    const size_t at = buf.size();
    buf.resize(at + n);
    std::memcpy(buf.data() + at, t.v.data(), n);
}

Tensor take_tensor(const uint8_t*& p, std::vector<int> shape) {
    Tensor t(std::move(shape));
    std::memcpy(t.v.data(), p, t.v.size() * 4);
    p += t.v.size() * 4;
    return t;
}

}  // namespace

void save_latent_cache(const std::string& path, const LatentCache& cache) {
    nlohmann::json header;
    header["dataset_hash"] = cache.dataset_hash;
    header["checkpoint_hash"] = cache.checkpoint_hash;
    header["n"] = cache.seqs.size();
    const int z_dim = cache.seqs.empty() ? 0 : cache.seqs[0].z[0].numel();
    const int hidden = cache.seqs.empty() ? 0 : cache.seqs[0].h1[0].numel();
    header["z_dim"] = z_dim;
    header["hidden"] = hidden;
    const std::string hs = header.dump();

    std::vector<uint8_t> buf;
    buf.insert(buf.end(), {'D', 'M', 'L', 'C'});
    put_u32v(buf, 1);
    put_u32v(buf, static_cast<uint32_t>(hs.size()));
    buf.insert(buf.end(), hs.begin(), hs.end());
    for (const auto& seq : cache.seqs) {
        put_u32v(buf, static_cast<uint32_t>(seq.z.size()));
        for (const auto& t : seq.z) put_tensor(buf, t);
        for (const auto& t : seq.h1) put_tensor(buf, t);
        for (const auto& t : seq.h2) put_tensor(buf, t);
    }
    put_u32v(buf, static_cast<uint32_t>(crc32(0L, buf.data(), static_cast<uInt>(buf.size()))));

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
        if (!out) throw std::runtime_error("cannot write " + tmp);
    }
    fs::rename(tmp, path);
}

LatentCache load_latent_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<uint8_t> buf(static_cast<size_t>(in.tellg()));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));

    if (buf.size() < 16 || std::memcmp(buf.data(), "DMLC", 4) != 0)
        throw CorruptFile(path, "magic");
    const uint8_t* p = buf.data() + 4;
    if (take_u32(p) != 1) throw CorruptFile(path, "version");
    const uint32_t stored = 0;
    (void)stored;
    {
        const uint8_t* tail = buf.data() + buf.size() - 4;
        const uint32_t crc_stored = tail[0] | (tail[1] << 8) | (tail[2] << 16)
                                    | (static_cast<uint32_t>(tail[3]) << 24);
        const auto crc = static_cast<uint32_t>(
            crc32(0L, buf.data(), static_cast<uInt>(buf.size() - 4)));
        if (crc != crc_stored) throw CorruptFile(path, "crc");
    }
    const uint32_t hlen = take_u32(p);
    nlohmann::json header = nlohmann::json::parse(p, p + hlen);
    p += hlen;

    LatentCache cache;
    cache.dataset_hash = header.at("dataset_hash").get<std::string>();
    cache.checkpoint_hash = header.at("checkpoint_hash").get<std::string>();
    const auto n = header.at("n").get<size_t>();
    const int z_dim = header.at("z_dim").get<int>();
    const int hidden = header.at("hidden").get<int>();
    cache.seqs.resize(n);
    for (auto& seq : cache.seqs) {
        const uint32_t steps = take_u32(p);
        seq.z.reserve(steps);
        seq.h1.reserve(steps);
        seq.h2.reserve(steps);
        for (uint32_t i = 0; i < steps; ++i) seq.z.push_back(take_tensor(p, {z_dim}));
        for (uint32_t i = 0; i < steps; ++i) seq.h1.push_back(take_tensor(p, {hidden}));
        for (uint32_t i = 0; i < steps; ++i) seq.h2.push_back(take_tensor(p, {hidden}));
    }
    return cache;
}

LatentCache latents_for_dataset(wm::WorldModel& model, const std::string& dataset_dir,
                                const std::string& checkpoint_path, const std::string& cache_dir) {
    const DatasetManifest manifest = load_manifest(dataset_dir);
    const std::string ckpt_hash = hash_file_hex(checkpoint_path);
    fs::create_directories(cache_dir);
    const std::string path = latent_cache_path(cache_dir, manifest.dataset_hash, ckpt_hash);

    if (fs::exists(path)) {
        LatentCache cache = load_latent_cache(path);
        if (cache.dataset_hash != manifest.dataset_hash || cache.checkpoint_hash != ckpt_hash)
            throw StaleCache("latent cache " + path + " does not match dataset/checkpoint hashes");
        return cache;
    }

    LatentCache cache;
    cache.dataset_hash = manifest.dataset_hash;
    cache.checkpoint_hash = ckpt_hash;
    for (const auto& entry : manifest.train_files) {
        const Trajectory traj = read_trajectory(dataset_dir + "/" + entry.file);
        const wm::SeqSample sample = make_seq_sample(traj, manifest.norm_stats);
        cache.seqs.push_back(wm::precompute_latents(model, sample));
    }
    save_latent_cache(path, cache);
    return cache;
}

TrainResult train_policy_frozen(const TrainConfig& cfg) {
    if (cfg.wm_checkpoint.empty())
        throw tasks::ConfigurationError("decoupled policy training needs wm_checkpoint");
    const std::string hash_before = hash_file_hex(cfg.wm_checkpoint);

    // fresh policy init at cfg.seed on top of the frozen phi/zeta weights
    wm::WorldModel frozen = wm::WorldModel::load(cfg.wm_checkpoint);
    wm::ModelConfig mc = frozen.config();
    mc.policy = cfg.model.policy;
    wm::WorldModel model(mc, cfg.seed);
    for (nn::Parameter* p : model.params().all()) {
        if (p->name.rfind("theta/", 0) == 0) continue;
        p->value = frozen.params().at(p->name).value;
    }

    const DatasetManifest manifest = load_manifest(cfg.dataset_dir);
    const std::string cache_dir = cfg.cache_dir.empty() ? cfg.dataset_dir : cfg.cache_dir;
    const LatentCache cache =
        latents_for_dataset(model, cfg.dataset_dir, cfg.wm_checkpoint, cache_dir);

    // actions and goals are tiny; preload them once
    std::vector<wm::SeqSample> lite;
    lite.reserve(manifest.train_files.size());
    for (const auto& entry : manifest.train_files) {
        const Trajectory traj = read_trajectory(cfg.dataset_dir + "/" + entry.file);
        wm::SeqSample s = make_seq_sample(traj, manifest.norm_stats);
        s.images.clear();
        s.p.clear();
        s.v.clear();
        s.a.clear();
        lite.push_back(std::move(s));
    }
    if (lite.size() != cache.seqs.size())
        throw StaleCache("latent cache trajectory count does not match dataset");

    nn::AdamState adam(cfg.adam);
    Rng rng(cfg.seed ^ 0x706f6c69ull);
    if (!cfg.log_csv.empty() && fs::exists(cfg.log_csv)) fs::remove(cfg.log_csv);

    TrainResult result;
    result.wm_hash_before = hash_before;
    std::vector<size_t> order(lite.size());
    std::iota(order.begin(), order.end(), 0);
    const std::vector<nn::Parameter*> opt = model.policy_params();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_index(i)]);
        wm::LossValues sum;
        int windows = 0;
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(cfg.batch_size)) {
            const size_t end =
                std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
            const float inv = 1.0f / static_cast<float>(end - start);
            for (size_t k = start; k < end; ++k) {
                nn::Tape tape;
                const wm::BuiltLoss built = wm::build_policy_loss_on_latents(
                    model, tape, cache.seqs[order[k]], lite[order[k]]);
                tape.backward(tape.scale(built.loss_id, inv));
                sum.policy += built.values.policy;
                sum.total += built.values.total;
                ++windows;
            }
            adam.step(opt);
        }
        const float invw = 1.0f / static_cast<float>(std::max(1, windows));
        sum.policy *= invw;
        sum.total *= invw;
        result.epochs.push_back(sum);
        append_csv(cfg.log_csv, epoch, sum);
    }

    if (!cfg.out_checkpoint.empty()) {
        model.save(cfg.out_checkpoint);
        result.checkpoint = cfg.out_checkpoint;
    }
    result.wm_hash_after = hash_file_hex(cfg.wm_checkpoint);
    if (result.wm_hash_after != hash_before)
        throw std::runtime_error("frozen world-model checkpoint changed during policy training");
    return result;
}

}  // namespace dynmap::harness
