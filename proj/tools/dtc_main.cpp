// Command-line pipeline driver: pretrain | train | evaluate | baseline |
// heatmap. Every emitted file carries the configuration and seed that
// produced it; on failure all partially written artifacts are removed.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dtc/checkpoint.hpp"
#include "dtc/clustering.hpp"
#include "dtc/dataio.hpp"
#include "dtc/evaluation.hpp"
#include "dtc/heatmap.hpp"
#include "dtc/hierarchical.hpp"
#include "dtc/rng.hpp"
#include "dtc/tae.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
    std::string dataset_train;
    std::string dataset_test;
    std::size_t synth_n = 200;
    std::size_t synth_length = 512;
    double synth_rate = 0.5;

    std::string metric = "CID";
    std::size_t pool_size = 0;  // 0 = dataset preset / length-based default
    std::size_t k = 2;
    std::uint64_t seed = 1;
    std::size_t epochs = 0;  // 0 = per-command default
    std::size_t pretrain_epochs = 0;
    std::size_t batch_size = 64;
    double lr = -1.0;  // < 0 = per-command default
    double pretrain_lr = -1.0;
    std::string out_dir = "out";
    std::string checkpoint_path;

    std::size_t n_filters = 50;
    std::size_t kernel_size = 10;
    double alpha = 1.0;
    double convergence_tol = 0.001;
    bool joint = true;
    std::size_t trials = 5;
    std::size_t bootstrap_runs = 10;
    std::size_t max_heatmaps = 8;
};

json config_json(const RunConfig& c, const std::string& command) {
    return json{{"command", command},
                {"dataset_train", c.dataset_train},
                {"dataset_test", c.dataset_test},
                {"synth_n", c.synth_n},
                {"synth_length", c.synth_length},
                {"synth_rate", c.synth_rate},
                {"metric", c.metric},
                {"pool_size", c.pool_size},
                {"k", c.k},
                {"seed", c.seed},
                {"epochs", c.epochs},
                {"pretrain_epochs", c.pretrain_epochs},
                {"batch_size", c.batch_size},
                {"lr", c.lr},
                {"pretrain_lr", c.pretrain_lr},
                {"out_dir", c.out_dir},
                {"checkpoint", c.checkpoint_path},
                {"n_filters", c.n_filters},
                {"kernel_size", c.kernel_size},
                {"alpha", c.alpha},
                {"convergence_tol", c.convergence_tol},
                {"joint", c.joint},
                {"trials", c.trials},
                {"bootstrap_runs", c.bootstrap_runs},
                {"max_heatmaps", c.max_heatmaps}};
}

// Values from a --config file override command-line flags.
void apply_config_file(RunConfig& c, const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open config file: " + path);
    json j;
    file >> j;

    auto set_str = [&](const char* key, std::string& out) {
        if (j.contains(key)) out = j.at(key).get<std::string>();
    };
    auto set_size = [&](const char* key, std::size_t& out) {
        if (j.contains(key)) out = j.at(key).get<std::size_t>();
    };
    auto set_double = [&](const char* key, double& out) {
        if (j.contains(key)) out = j.at(key).get<double>();
    };
    set_str("dataset_train", c.dataset_train);
    set_str("dataset_test", c.dataset_test);
    set_size("synth_n", c.synth_n);
    set_size("synth_length", c.synth_length);
    set_double("synth_rate", c.synth_rate);
    set_str("metric", c.metric);
    set_size("pool_size", c.pool_size);
    set_size("k", c.k);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    set_size("epochs", c.epochs);
    set_size("pretrain_epochs", c.pretrain_epochs);
    set_size("batch_size", c.batch_size);
    set_double("lr", c.lr);
    set_double("pretrain_lr", c.pretrain_lr);
    set_str("out_dir", c.out_dir);
    set_str("checkpoint", c.checkpoint_path);
    set_size("n_filters", c.n_filters);
    set_size("kernel_size", c.kernel_size);
    set_double("alpha", c.alpha);
    set_double("convergence_tol", c.convergence_tol);
    if (j.contains("joint")) c.joint = j.at("joint").get<bool>();
    set_size("trials", c.trials);
    set_size("bootstrap_runs", c.bootstrap_runs);
    set_size("max_heatmaps", c.max_heatmaps);
}

// Tracks written artifacts; unless the command commits, everything written
// so far is removed on scope exit so failures leave nothing behind.
class Artifacts {
public:
    explicit Artifacts(const fs::path& dir) : dir_(dir) { fs::create_directories(dir); }

    ~Artifacts() {
        if (committed_) return;
        for (const fs::path& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    fs::path declare(const std::string& name) {
        const fs::path p = dir_ / name;
        written_.push_back(p);
        return p;
    }

    void commit() { committed_ = true; }

    const std::vector<fs::path>& paths() const { return written_; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

std::ofstream open_csv(const fs::path& path, const json& config, const std::string& header) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write " + path.string());
    file << "# config: " << config.dump() << "\n" << header << "\n";
    return file;
}

std::string resolve_dataset_path(const std::string& path) {
    if (path.empty() || fs::exists(path)) return path;
    if (const char* root = std::getenv("DTC_DATA_DIR"); root && *root) {
        const fs::path candidate = fs::path(root) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;  // let the loader produce the error message
}

std::string dataset_stem(const std::string& path) {
    std::string stem = fs::path(path).stem().string();
    for (const char* suffix : {"_TRAIN", "_TEST"}) {
        const std::size_t pos = stem.rfind(suffix);
        if (pos != std::string::npos && pos + std::strlen(suffix) == stem.size()) {
            stem.resize(pos);
        }
    }
    return stem;
}

std::size_t preset_pool_size(const std::string& name, std::size_t length) {
    static const std::map<std::string, std::size_t> presets = {
        {"synth-events", 10}, {"MoteStrain", 4},        {"BeetleFly", 8},
        {"ECG5000", 5},       {"ItalyPowerDemand", 4},  {"Plane", 6},
        {"OSULeaf", 7},       {"Trace", 7},             {"WordSynonyms", 9},
    };
    if (const auto it = presets.find(name); it != presets.end()) return it->second;
    return length >= 1024 ? 10 : 8;
}

dtc::dataio::Dataset load_dataset(RunConfig& c, std::uint64_t synth_seed) {
    dtc::dataio::Dataset data;
    if (!c.dataset_train.empty()) {
        const std::string train = resolve_dataset_path(c.dataset_train);
        const std::string test = c.dataset_test.empty() ? "" : resolve_dataset_path(c.dataset_test);
        data = dtc::dataio::load_ucr(train, test, dataset_stem(c.dataset_train));
    } else {
        data = dtc::dataio::synth_events(c.synth_n, c.synth_length, c.synth_rate, synth_seed);
    }
    data = dtc::dataio::znormalize(std::move(data));
    if (c.pool_size == 0) c.pool_size = preset_pool_size(data.name, data.length);
    return data;
}

dtc::tae::TaeConfig tae_config(const RunConfig& c, std::size_t input_length) {
    dtc::tae::TaeConfig cfg;
    cfg.input_length = input_length;
    cfg.n_filters = c.n_filters;
    cfg.kernel_size = c.kernel_size;
    cfg.pool_size = c.pool_size;
    return cfg;
}

json dataset_meta(const dtc::dataio::Dataset& data) {
    json meta{{"name", data.name}, {"n", data.n}, {"length", data.length}};
    if (data.has_labels()) {
        meta["positives"] = data.positives();
        meta["negatives"] = data.n - data.positives();
        meta["class_ratio"] = data.class_ratio();
    }
    return meta;
}

// Orients 2-cluster scores so that higher means label 1; returns the
// aligned AUC.
double orient_scores(std::vector<double>& scores, const std::vector<int>& labels) {
    const double raw = dtc::eval::auc(dtc::eval::roc_curve(scores, labels));
    if (raw < 0.5) {
        for (double& s : scores) s = 1.0 - s;
        return 1.0 - raw;
    }
    return raw;
}

void write_roc_csv(const fs::path& path, const json& config,
                   const std::vector<dtc::eval::RocPoint>& curve) {
    std::ofstream file = open_csv(path, config, "fpr,tpr");
    for (const auto& pt : curve) file << pt.fpr << "," << pt.tpr << "\n";
    if (!file) throw std::runtime_error("write failed: " + path.string());
}

json roc_json(const std::vector<dtc::eval::RocPoint>& curve) {
    json points = json::array();
    for (const auto& pt : curve) points.push_back({pt.fpr, pt.tpr});
    return points;
}

// ---------------------------------------------------------------------------

int cmd_pretrain(RunConfig& c) {
    dtc::Rng master(c.seed);
    const std::uint64_t synth_seed = master.next_seed();
    const std::uint64_t init_seed = master.next_seed();
    const std::uint64_t train_seed = master.next_seed();

    const dtc::dataio::Dataset data = load_dataset(c, synth_seed);
    const json config = config_json(c, "pretrain");

    dtc::tae::TaeModel model = dtc::tae::init_tae(tae_config(c, data.length), init_seed);
    dtc::tae::PretrainOptions options;
    if (c.epochs > 0) options.epochs = c.epochs;
    if (c.lr >= 0.0) options.learning_rate = c.lr;
    options.batch_size = c.batch_size;

    std::printf("pretraining on %s (n=%zu, L=%zu) for %zu epochs\n", data.name.c_str(), data.n,
                data.length, options.epochs);
    const std::vector<double> losses = dtc::tae::pretrain(model, data, options, train_seed);

    Artifacts artifacts(c.out_dir);
    dtc::dataio::save_checkpoint(artifacts.declare("pretrained.ckpt").string(), model);
    std::ofstream csv =
        open_csv(artifacts.declare("pretrain_loss.csv"), config, "epoch,reconstruction_loss");
    for (std::size_t e = 0; e < losses.size(); ++e) csv << e + 1 << "," << losses[e] << "\n";
    if (!csv) throw std::runtime_error("write failed: pretrain_loss.csv");
    csv.close();

    std::printf("final reconstruction loss %.6f\n", losses.back());
    artifacts.commit();
    for (const fs::path& p : artifacts.paths()) std::printf("wrote %s\n", p.string().c_str());
    return 0;
}

int cmd_train(RunConfig& c) {
    dtc::Rng master(c.seed);
    const std::uint64_t synth_seed = master.next_seed();
    const std::uint64_t train_seed = master.next_seed();

    const dtc::dataio::Dataset data = load_dataset(c, synth_seed);
    const json config = config_json(c, "train");

    const std::string ckpt_in =
        c.checkpoint_path.empty() ? (fs::path(c.out_dir) / "pretrained.ckpt").string()
                                  : c.checkpoint_path;
    dtc::tae::TaeModel model = dtc::dataio::load_checkpoint(ckpt_in).model;

    dtc::clustering::TrainConfig tc;
    tc.k = c.k;
    tc.metric = dtc::similarity::metric_from_string(c.metric);
    tc.alpha = c.alpha;
    if (c.epochs > 0) tc.max_epochs = c.epochs;
    tc.batch_size = c.batch_size;
    if (c.lr >= 0.0) tc.learning_rate = c.lr;
    tc.convergence_tol = c.convergence_tol;
    tc.joint = c.joint;

    std::printf("clustering %s (n=%zu, L=%zu) with %s, k=%zu\n", data.name.c_str(), data.n,
                data.length, c.metric.c_str(), c.k);
    const dtc::clustering::TrainResult result =
        dtc::clustering::train_dtc(model, data, tc, train_seed);

    Artifacts artifacts(c.out_dir);
    dtc::dataio::save_checkpoint(artifacts.declare("trained.ckpt").string(), model,
                                 &result.centroids);
    std::ofstream csv = open_csv(artifacts.declare("train_history.csv"), config,
                                 "epoch,kl_loss,mse_loss,assignment_change_fraction");
    for (const auto& row : result.history) {
        csv << row.epoch << "," << row.kl << "," << row.mse << "," << row.assignment_change
            << "\n";
    }
    if (!csv) throw std::runtime_error("write failed: train_history.csv");
    csv.close();

    std::printf("%s after %zu epochs (last change fraction %.4f)\n",
                result.converged ? "converged" : "stopped", result.history.size(),
                result.history.back().assignment_change);
    artifacts.commit();
    for (const fs::path& p : artifacts.paths()) std::printf("wrote %s\n", p.string().c_str());
    return 0;
}

int cmd_evaluate(RunConfig& c) {
    dtc::Rng master(c.seed);
    const std::uint64_t synth_seed = master.next_seed();

    const dtc::dataio::Dataset data = load_dataset(c, synth_seed);
    if (!data.has_labels()) throw std::runtime_error("evaluate: dataset has no labels");
    const json config = config_json(c, "evaluate");
    const dtc::similarity::MetricKind metric = dtc::similarity::metric_from_string(c.metric);

    Artifacts artifacts(c.out_dir);
    json trials_json = json::array();
    std::vector<double> trial_aucs;
    for (std::size_t trial = 0; trial < c.trials; ++trial) {
        const std::uint64_t init_seed = master.next_seed();
        const std::uint64_t pretrain_seed = master.next_seed();
        const std::uint64_t train_seed = master.next_seed();

        dtc::tae::TaeModel model = dtc::tae::init_tae(tae_config(c, data.length), init_seed);
        dtc::tae::PretrainOptions pre;
        pre.batch_size = c.batch_size;
        if (c.pretrain_epochs > 0) pre.epochs = c.pretrain_epochs;
        if (c.pretrain_lr >= 0.0) pre.learning_rate = c.pretrain_lr;
        dtc::tae::pretrain(model, data, pre, pretrain_seed);

        dtc::clustering::TrainConfig tc;
        tc.k = c.k;
        tc.metric = metric;
        tc.alpha = c.alpha;
        if (c.epochs > 0) tc.max_epochs = c.epochs;
        tc.batch_size = c.batch_size;
        if (c.lr >= 0.0) tc.learning_rate = c.lr;
        tc.convergence_tol = c.convergence_tol;
        tc.joint = c.joint;
        const dtc::clustering::TrainResult result =
            dtc::clustering::train_dtc(model, data, tc, train_seed);

        std::vector<double> scores = dtc::eval::assignment_scores(result.q);
        const double auc = orient_scores(scores, data.labels);
        const auto curve = dtc::eval::roc_curve(scores, data.labels);
        write_roc_csv(artifacts.declare("roc_trial_" + std::to_string(trial) + ".csv"), config,
                      curve);

        trial_aucs.push_back(auc);
        trials_json.push_back({{"trial", trial},
                               {"auc", auc},
                               {"converged", result.converged},
                               {"epochs", result.history.size()},
                               {"roc", roc_json(curve)}});
        std::printf("trial %zu: auc %.4f (%s, %zu epochs)\n", trial, auc,
                    result.converged ? "converged" : "capped", result.history.size());
    }

    double mean = 0.0;
    for (double a : trial_aucs) mean += a;
    mean /= static_cast<double>(trial_aucs.size());
    double stderr_ = 0.0;
    if (trial_aucs.size() > 1) {
        double ss = 0.0;
        for (double a : trial_aucs) ss += (a - mean) * (a - mean);
        stderr_ = std::sqrt(ss / static_cast<double>(trial_aucs.size() - 1)) /
                  std::sqrt(static_cast<double>(trial_aucs.size()));
    }

    json report{{"config", config},   {"dataset", dataset_meta(data)},
                {"auc_mean", mean},   {"auc_stderr", stderr_},
                {"trial_aucs", trial_aucs}, {"trials", trials_json}};
    std::ofstream out(artifacts.declare("report.json"));
    out << report.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: report.json");
    out.close();

    std::printf("auc mean %.4f stderr %.4f over %zu trials\n", mean, stderr_, trial_aucs.size());
    artifacts.commit();
    for (const fs::path& p : artifacts.paths()) std::printf("wrote %s\n", p.string().c_str());
    return 0;
}

int cmd_baseline(RunConfig& c) {
    dtc::Rng master(c.seed);
    const std::uint64_t synth_seed = master.next_seed();
    const std::uint64_t bootstrap_seed = master.next_seed();

    const dtc::dataio::Dataset data = load_dataset(c, synth_seed);
    if (!data.has_labels()) throw std::runtime_error("baseline: dataset has no labels");
    const json config = config_json(c, "baseline");
    const dtc::similarity::MetricKind metric = dtc::similarity::metric_from_string(c.metric);

    std::vector<std::vector<double>> sequences(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
        const auto seq = data.sequence(i);
        sequences[i].assign(seq.begin(), seq.end());
    }

    std::printf("hierarchical baseline on %s (n=%zu, L=%zu) with %s, k=%zu\n", data.name.c_str(),
                data.n, data.length, c.metric.c_str(), c.k);
    const dtc::hierarchical::BaselineResult base =
        dtc::hierarchical::baseline_cluster(sequences, metric, c.k);
    if (c.k != 2) throw std::runtime_error("baseline: AUC evaluation requires k=2");

    std::vector<double> scores(data.n);
    for (std::size_t i = 0; i < data.n; ++i) scores[i] = base.scores[i][0];
    const double point_auc = orient_scores(scores, data.labels);
    const dtc::eval::BootstrapResult boot =
        dtc::eval::bootstrap_auc(scores, data.labels, c.bootstrap_runs, bootstrap_seed);

    Artifacts artifacts(c.out_dir);
    const auto curve = dtc::eval::roc_curve(scores, data.labels);
    write_roc_csv(artifacts.declare("baseline_roc.csv"), config, curve);

    json report{{"config", config},
                {"dataset", dataset_meta(data)},
                {"auc_point", point_auc},
                {"auc_mean", boot.mean},
                {"auc_stderr", boot.std_error},
                {"bootstrap_aucs", boot.values},
                {"roc", roc_json(curve)}};
    std::ofstream out(artifacts.declare("baseline_report.json"));
    out << report.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: baseline_report.json");
    out.close();

    std::printf("baseline auc %.4f (bootstrap mean %.4f, stderr %.4f over %zu runs)\n", point_auc,
                boot.mean, boot.std_error, c.bootstrap_runs);
    artifacts.commit();
    for (const fs::path& p : artifacts.paths()) std::printf("wrote %s\n", p.string().c_str());
    return 0;
}

int cmd_heatmap(RunConfig& c) {
    dtc::Rng master(c.seed);
    const std::uint64_t synth_seed = master.next_seed();
    const std::uint64_t localizer_seed = master.next_seed();

    const dtc::dataio::Dataset data = load_dataset(c, synth_seed);
    const json config = config_json(c, "heatmap");

    const std::string ckpt_in =
        c.checkpoint_path.empty() ? (fs::path(c.out_dir) / "trained.ckpt").string()
                                  : c.checkpoint_path;
    const dtc::dataio::Checkpoint ckpt = dtc::dataio::load_checkpoint(ckpt_in);
    if (ckpt.centroids.empty()) {
        throw std::runtime_error("heatmap: checkpoint has no centroids (run train first)");
    }

    const auto latents = dtc::tae::encode_all(ckpt.model, data);
    const dtc::Tensor q = dtc::clustering::soft_assign(
        latents, ckpt.centroids, dtc::similarity::metric_from_string(c.metric), c.alpha);
    const std::vector<int> cluster_labels = dtc::clustering::hard_assign(q);

    dtc::heatmap::LocalizerConfig lc;
    lc.n_classes = c.k;
    std::printf("training localizer on %zu cluster-labeled sequences\n", data.n);
    dtc::heatmap::LocalizerTrainInfo info;
    const dtc::heatmap::LocalizerModel localizer =
        dtc::heatmap::train_localizer(data, cluster_labels, lc, localizer_seed, &info);
    std::printf("localizer accuracy %.3f after %zu epochs\n", info.final_accuracy,
                info.epochs_run);

    Artifacts artifacts(c.out_dir);
    const std::size_t count = std::min(c.max_heatmaps, data.n);
    for (std::size_t i = 0; i < count; ++i) {
        const auto seq = data.sequence(i);
        const auto cls = static_cast<std::size_t>(cluster_labels[i]);
        const std::vector<double> map = dtc::heatmap::generate_heatmap(localizer, seq, cls);
        std::ofstream csv =
            open_csv(artifacts.declare("heatmap_" + std::to_string(i) + ".csv"), config,
                     "time_index,input_value,heatmap_value");
        for (std::size_t t = 0; t < seq.size(); ++t) {
            csv << t << "," << seq[t] << "," << map[t] << "\n";
        }
        if (!csv) throw std::runtime_error("write failed: heatmap csv");
    }

    artifacts.commit();
    for (const fs::path& p : artifacts.paths()) std::printf("wrote %s\n", p.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep temporal clustering pipeline"};
    app.require_subcommand(1);

    RunConfig config;
    std::string config_file;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--dataset-train", config.dataset_train,
                        "Training split (UCR text format); omit to use synthetic data");
        cmd->add_option("--dataset-test", config.dataset_test,
                        "Test split, concatenated with the training split");
        cmd->add_option("--synth-n", config.synth_n, "Synthetic dataset size");
        cmd->add_option("--synth-length", config.synth_length, "Synthetic sequence length");
        cmd->add_option("--synth-rate", config.synth_rate, "Synthetic event rate");
        cmd->add_option("--metric", config.metric, "Similarity metric: EUCL|CID|COR|ACF");
        cmd->add_option("--pool-size", config.pool_size, "Pooling factor P (0 = preset)");
        cmd->add_option("--k", config.k, "Number of clusters");
        cmd->add_option("--seed", config.seed, "Master seed");
        cmd->add_option("--epochs", config.epochs, "Epoch count (0 = command default)");
        cmd->add_option("--pretrain-epochs", config.pretrain_epochs,
                        "Autoencoder epochs before clustering in evaluate (0 = default)");
        cmd->add_option("--batch-size", config.batch_size, "Mini-batch size");
        cmd->add_option("--lr", config.lr, "Learning rate (negative = command default)");
        cmd->add_option("--pretrain-lr", config.pretrain_lr,
                        "Autoencoder learning rate in evaluate (negative = default)");
        cmd->add_flag("--joint,!--disjoint", config.joint,
                      "Interleave reconstruction updates with clustering updates");
        cmd->add_option("--out-dir", config.out_dir, "Output directory");
        cmd->add_option("--checkpoint", config.checkpoint_path, "Input checkpoint path");
        cmd->add_option("--trials", config.trials, "Training trials for evaluate");
        cmd->add_option("--bootstrap-runs", config.bootstrap_runs, "Bootstrap resamples");
        cmd->add_option("--max-heatmaps", config.max_heatmaps, "Heatmap CSV count cap");
        cmd->add_option("--config", config_file, "JSON config file; its values override flags");
    };

    CLI::App* pretrain = app.add_subcommand("pretrain", "Reconstruction-only autoencoder training");
    CLI::App* train = app.add_subcommand("train", "Joint clustering refinement");
    CLI::App* evaluate = app.add_subcommand("evaluate", "Multi-trial AUC protocol");
    CLI::App* baseline = app.add_subcommand("baseline", "Hierarchical baseline with bootstrap");
    CLI::App* heatmap = app.add_subcommand("heatmap", "Event-localization heatmap CSVs");
    for (CLI::App* cmd : {pretrain, train, evaluate, baseline, heatmap}) add_common(cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) apply_config_file(config, config_file);
        if (pretrain->parsed()) return cmd_pretrain(config);
        if (train->parsed()) return cmd_train(config);
        if (evaluate->parsed()) return cmd_evaluate(config);
        if (baseline->parsed()) return cmd_baseline(config);
        if (heatmap->parsed()) return cmd_heatmap(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
