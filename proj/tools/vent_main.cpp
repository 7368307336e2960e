#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "vent/checkpoint.hpp"
#include "vent/config.hpp"
#include "vent/dataset_io.hpp"
#include "vent/kv.hpp"
#include "vent/report.hpp"

namespace fs = std::filesystem;
using namespace vent;

namespace {

std::string out_dir() {
    const char* e = std::getenv("VENT_OUT_DIR");
    return e && *e ? std::string(e) : std::string(".");
}

void refuse_overwrite(const std::string& path, bool force) {
    if (!force && fs::exists(path))
        throw ConfigError(path + " already exists; pass --force to overwrite");
}

// Every RunConfig key doubles as a --key flag; collected raw and applied on
// top of the config file so flags always win.
const std::vector<std::pair<const char*, const char*>> kConfigKeys = {
    {"subjects", "number of synthetic subjects"},
    {"female", "number of female subjects"},
    {"windows_per_subject", "windows generated per subject"},
    {"fs_hz", "sampling rate in Hz"},
    {"window_seconds", "window duration in seconds"},
    {"seed", "dataset generation seed"},
    {"split_train", "train split fraction"},
    {"split_val", "validation split fraction"},
    {"split_test", "test split fraction"},
    {"age_min", "minimum subject age"},
    {"age_max", "maximum subject age"},
    {"conv_width", "base conv channel width (blocks use x1,2,4,8,8)"},
    {"dense1", "first dense layer units"},
    {"dense2", "second dense layer units"},
    {"optimizer", "adam or sgd-momentum"},
    {"lr", "learning rate"},
    {"batch", "batch size"},
    {"epochs", "maximum training epochs"},
    {"patience", "early-stopping patience in epochs"},
    {"train_seed", "training seed (init + shuffling)"},
    {"finetune_epochs", "fine-tuning epochs after pruning"},
    {"pretrain", "run proxy-task pretraining first (0/1)"},
    {"proxy_classes", "proxy task class count"},
    {"proxy_per_class", "proxy task samples per class"},
    {"proxy_epochs", "proxy pretraining epochs"},
    {"sparsity", "pruned weight fraction in [0,1)"},
    {"prune_scope", "global or per-layer"},
    {"skip_pattern", "block-skip or dense-skip"},
    {"skip_density", "skip kernel nonzero fraction in (0,1]"},
    {"alpha", "significance level"},
};

RunConfig resolve_config(const std::string& config_path,
                         const std::map<std::string, std::string>& overrides) {
    RunConfig cfg;
    if (!config_path.empty()) cfg.apply(read_kv_file(config_path));
    cfg.apply(overrides);
    cfg.validate();
    return cfg;
}

void check_dataset_shape(const RunConfig& cfg, const std::string& path, double fs,
                         int window_len) {
    int expect_len = static_cast<int>(std::lround(cfg.window_seconds * cfg.fs_hz));
    if (std::abs(fs - cfg.fs_hz) > 1e-4 || window_len != expect_len)
        throw ConfigError(path + ": dataset shape (fs " + std::to_string(fs) + " Hz, " +
                          std::to_string(window_len) + " samples) does not match the config (fs " +
                          std::to_string(cfg.fs_hz) + " Hz, " + std::to_string(expect_len) +
                          " samples)");
}

void check_checkpoint_shape(const NetworkGraph<float>& g, const std::string& path,
                            int window_len) {
    if (g.spec.input_len != window_len || g.spec.input_channels != 2)
        throw ConfigError(path + ": checkpoint expects input [" +
                          std::to_string(g.spec.input_channels) + "," +
                          std::to_string(g.spec.input_len) + "], dataset windows have [2," +
                          std::to_string(window_len) + "]");
}

std::uint32_t window_uid(const SignalWindow& w) {
    return w.subject_id * 1000000u + w.window_id;
}

EvalReport eval_split(NetworkGraph<float>& g, const std::vector<const SignalWindow*>& ws,
                      const std::string& name) {
    if (ws.empty()) throw ConfigError("evaluation split is empty");
    auto pred = predict(g, ws);
    std::vector<double> ref;
    std::vector<int> levels, subjects;
    std::vector<std::uint32_t> wids;
    for (const auto* w : ws) {
        ref.push_back(w->mv_true);
        levels.push_back(w->artifact_level);
        subjects.push_back(static_cast<int>(w->subject_id));
        wids.push_back(window_uid(*w));
    }
    return compute_eval_report(name, pred, ref, levels, subjects, wids);
}

std::vector<double> abs_errors(NetworkGraph<float>& g,
                               const std::vector<const SignalWindow*>& ws) {
    auto pred = predict(g, ws);
    std::vector<double> out(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        out[i] = std::abs(pred[i] - static_cast<double>(ws[i]->mv_true));
    return out;
}

PruneSummary parse_prune_summary(const std::string& path) {
    auto kv = read_kv_file(path);
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw DataFormatError(DataFormatError::Kind::malformed,
                                  path + " is missing key '" + std::string(key) + "'");
        return it->second;
    };
    PruneSummary s;
    s.sparsity = std::stod(need("sparsity"));
    s.scope = need("scope");
    s.pattern = need("pattern");
    s.skip_density = std::stod(need("skip_density"));
    s.params_before = std::stol(need("params_before"));
    s.params_after = std::stol(need("params_after"));
    s.connectivity_before = std::stod(need("connectivity_before"));
    s.connectivity_after = std::stod(need("connectivity_after"));
    return s;
}

int cmd_synth(const RunConfig& cfg, const std::string& out, bool force) {
    refuse_overwrite(out, force);
    Dataset ds = build_dataset(cfg.manifest());
    export_dataset(ds, out);
    std::cout << "dataset: " << ds.windows.size() << " windows from "
              << cfg.subjects << " subjects (" << cfg.female << " female, "
              << cfg.subjects - cfg.female << " male), fs " << cfg.fs_hz << " Hz, "
              << cfg.window_seconds << " s windows, seed " << cfg.seed << "\n"
              << "splits: " << ds.train_subjects.size() << " train / " << ds.val_subjects.size()
              << " val / " << ds.test_subjects.size() << " test subjects\n"
              << "wrote " << out << " and " << out << ".manifest\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& data, const std::string& out, bool force) {
    refuse_overwrite(out, force);
    Dataset ds = import_dataset(data);
    double fs = ds.manifest.fs_hz;
    int window_len = ds.windows.empty() ? 0 : static_cast<int>(ds.windows[0].resp_flow.size());
    check_dataset_shape(cfg, data, fs, window_len);

    ArchConfig arch = cfg.arch(1);
    Rng init_rng(cfg.train_seed);
    auto g = build_neural_net_a<float>(arch, init_rng);
    std::cout << "neural-net-a: " << param_count(g) << " parameters\n";

    if (cfg.pretrain) {
        ArchConfig proxy_arch = cfg.arch(cfg.proxy_classes);
        Rng proxy_rng = Rng(cfg.train_seed).derive(0xBEEFULL);
        auto proxy = build_neural_net_a<float>(proxy_arch, proxy_rng);
        auto proxy_ds = make_proxy_dataset(cfg.proxy_classes, cfg.proxy_per_class, 2,
                                           arch.input_len, cfg.train_seed);
        TrainConfig pcfg = cfg.train_config();
        pcfg.max_epochs = cfg.proxy_epochs;
        pcfg.patience = cfg.proxy_epochs;
        auto pres = pretrain_proxy(proxy, proxy_ds, pcfg);
        transfer_conv_weights(proxy, g);
        std::cout << "proxy pretraining: holdout accuracy " << pres.holdout_accuracy << " on "
                  << pres.holdout_n << " samples, conv trunk transferred\n";
    }

    OptimizerState opt;
    auto res = train(g, ds.train(), ds.val(), cfg.train_config(), &opt);
    save_checkpoint(g, &opt, res.best_epoch, res.history, out);
    write_file_atomic(out + ".history.csv", history_to_csv(res.history));
    std::cout << "trained " << res.history.size() << " epochs, best val RMSE "
              << res.best_val_rmse << " at epoch " << res.best_epoch << "\n"
              << "wrote " << out << " and " << out << ".history.csv\n";
    return 0;
}

int cmd_prune(const RunConfig& cfg, const std::string& data, const std::string& in,
              const std::string& out, bool force) {
    refuse_overwrite(out, force);
    Dataset ds = import_dataset(data);
    int window_len = ds.windows.empty() ? 0 : static_cast<int>(ds.windows[0].resp_flow.size());
    check_dataset_shape(cfg, data, ds.manifest.fs_hz, window_len);

    auto ck = load_checkpoint(in, true);
    check_checkpoint_shape(ck.graph, in, window_len);

    Rng skip_rng = Rng(cfg.train_seed).derive(0x5C1FULL);
    auto res = make_neural_net_b(ck.graph, cfg.sparsity, parse_skip_pattern(cfg.skip_pattern),
                                 cfg.skip_density, skip_rng, cfg.scope());
    std::cout << "pruned " << res.summary.params_before << " -> " << res.summary.params_after
              << " effective parameters (sparsity " << cfg.sparsity << ", " << cfg.skip_pattern
              << " density " << cfg.skip_density << ")\n"
              << "connectivity " << res.summary.connectivity_before << " -> "
              << res.summary.connectivity_after << "\n";

    TrainConfig ft = cfg.train_config();
    ft.max_epochs = cfg.finetune_epochs;
    ft.patience = std::min(ft.patience, ft.max_epochs);
    auto tr = train(res.graph, ds.train(), ds.val(), ft);
    save_checkpoint(res.graph, nullptr, tr.best_epoch, tr.history, out);
    write_file_atomic(out + ".history.csv", history_to_csv(tr.history));
    write_file_atomic(out + ".prune.txt", res.summary.to_kv_text());
    std::cout << "fine-tuned " << tr.history.size() << " epochs, best val RMSE "
              << tr.best_val_rmse << "\n"
              << "wrote " << out << ", " << out << ".history.csv, " << out << ".prune.txt\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& data, const std::string& ckpt_path,
             const std::string& name, const std::string& prefix, bool force) {
    refuse_overwrite(prefix + ".metrics.csv", force);
    Dataset ds = import_dataset(data);
    int window_len = ds.windows.empty() ? 0 : static_cast<int>(ds.windows[0].resp_flow.size());
    check_dataset_shape(cfg, data, ds.manifest.fs_hz, window_len);

    auto ck = load_checkpoint(ckpt_path, true);
    check_checkpoint_shape(ck.graph, ckpt_path, window_len);

    auto test_ws = ds.test();
    auto rep = eval_split(ck.graph, test_ws, name);
    write_file_atomic(prefix + ".metrics.csv", metrics_csv({rep}, "test"));

    auto pred = predict(ck.graph, test_ws);
    std::vector<double> ref;
    for (const auto* w : test_ws) ref.push_back(w->mv_true);
    write_file_atomic(prefix + ".scatter.svg", svg_scatter(ref, pred, name + " on test split"));

    std::cout << name << ": n " << rep.n << ", RMSE " << rep.rmse << ", MAE " << rep.mae
              << ", r " << rep.pearson_r << "\n"
              << "wrote " << prefix << ".metrics.csv and " << prefix << ".scatter.svg\n";
    return 0;
}

int cmd_compare(const RunConfig& cfg, const std::string& data, const std::string& path_a,
                const std::string& path_b, const std::string& prune_summary_path,
                const std::string& prefix, bool force) {
    refuse_overwrite(prefix + ".compare.csv", force);
    Dataset ds = import_dataset(data);
    int window_len = ds.windows.empty() ? 0 : static_cast<int>(ds.windows[0].resp_flow.size());
    check_dataset_shape(cfg, data, ds.manifest.fs_hz, window_len);

    auto ck_a = load_checkpoint(path_a, true);
    auto ck_b = load_checkpoint(path_b, true);
    check_checkpoint_shape(ck_a.graph, path_a, window_len);
    check_checkpoint_shape(ck_b.graph, path_b, window_len);

    auto test_ws = ds.test();
    auto rep_a = eval_split(ck_a.graph, test_ws, "neural-net-a");
    auto rep_b = eval_split(ck_b.graph, test_ws, "neural-net-b");

    SignificanceResult sig;
    sig.alpha = cfg.alpha;
    try {
        sig = paired_significance(abs_errors(ck_a.graph, test_ws),
                                  abs_errors(ck_b.graph, test_ws), cfg.alpha);
    } catch (const NumericError&) {
        // identical per-window errors: no detectable difference
        sig.p_value = 1.0;
        sig.significant = false;
    }

    auto cmp = compare_models(rep_a, rep_b, sig);
    cmp.delta_params = param_count(ck_b.graph, true) - param_count(ck_a.graph, true);
    cmp.delta_connectivity =
        connectivity_score(ck_b.graph).score - connectivity_score(ck_a.graph).score;

    PruneSummary prune;
    bool have_prune = !prune_summary_path.empty();
    if (have_prune) prune = parse_prune_summary(prune_summary_path);

    write_file_atomic(prefix + ".compare.csv",
                      comparison_csv(cmp, rep_a, rep_b, have_prune ? &prune : nullptr));
    write_file_atomic(prefix + ".metrics.csv", metrics_csv({rep_a, rep_b}, "test"));
    write_file_atomic(prefix + ".levels.svg",
                      svg_level_bars({rep_a, rep_b}, "test RMSE by artifact level"));
    std::vector<double> ref;
    for (const auto* w : test_ws) ref.push_back(w->mv_true);
    write_file_atomic(prefix + ".scatter_a.svg",
                      svg_scatter(ref, predict(ck_a.graph, test_ws), "neural-net-a on test split"));
    write_file_atomic(prefix + ".scatter_b.svg",
                      svg_scatter(ref, predict(ck_b.graph, test_ws), "neural-net-b on test split"));

    std::cout << "a: RMSE " << rep_a.rmse << ", r " << rep_a.pearson_r << " | b: RMSE "
              << rep_b.rmse << ", r " << rep_b.pearson_r << "\n"
              << "delta params " << cmp.delta_params << ", wilcoxon p " << sig.p_value << " ("
              << sig.annotation() << ")\n"
              << "wrote " << prefix << ".compare.csv, .metrics.csv, .levels.svg, "
              << ".scatter_a.svg, .scatter_b.svg\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minute-ventilation estimation workbench"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "key=value config file");
    std::map<std::string, std::string> overrides;
    for (const auto& [key, help] : kConfigKeys) {
        std::string k = key;
        app.add_option(
            "--" + k,
            [&overrides, k](const CLI::results_t& res) {
                overrides[k] = res.back();
                return true;
            },
            help);
    }

    bool force = false;
    app.add_flag("--force", force, "overwrite existing output files");

    auto* synth = app.add_subcommand("synth", "generate the synthetic dataset");
    std::string synth_out = out_dir() + "/dataset.vntd";
    synth->add_option("--out", synth_out, "output dataset path");

    auto* train_cmd = app.add_subcommand("train", "train the full-size regressor");
    std::string train_data, train_out = out_dir() + "/model_a.vntc";
    train_cmd->add_option("--data", train_data, "dataset path")->required();
    train_cmd->add_option("--out", train_out, "output checkpoint path");

    auto* prune_cmd = app.add_subcommand("prune", "prune, rewire, and fine-tune");
    std::string prune_data, prune_in, prune_out = out_dir() + "/model_b.vntc";
    prune_cmd->add_option("--data", prune_data, "dataset path")->required();
    prune_cmd->add_option("--in", prune_in, "trained checkpoint to prune")->required();
    prune_cmd->add_option("--out", prune_out, "output checkpoint path");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    std::string eval_data, eval_ckpt, eval_name = "model";
    std::string eval_prefix = out_dir() + "/eval";
    eval_cmd->add_option("--data", eval_data, "dataset path")->required();
    eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint path")->required();
    eval_cmd->add_option("--name", eval_name, "model name used in reports");
    eval_cmd->add_option("--out-prefix", eval_prefix, "output file prefix");

    auto* compare_cmd = app.add_subcommand("compare", "full A-vs-B comparison report");
    std::string cmp_data, cmp_a, cmp_b, cmp_prune;
    std::string cmp_prefix = out_dir() + "/compare";
    compare_cmd->add_option("--data", cmp_data, "dataset path")->required();
    compare_cmd->add_option("--a", cmp_a, "baseline checkpoint")->required();
    compare_cmd->add_option("--b", cmp_b, "pruned checkpoint")->required();
    compare_cmd->add_option("--prune-summary", cmp_prune, "prune summary to append");
    compare_cmd->add_option("--out-prefix", cmp_prefix, "output file prefix");

    try {
        app.parse(argc, argv);
        RunConfig cfg = resolve_config(config_path, overrides);
        if (synth->parsed()) return cmd_synth(cfg, synth_out, force);
        if (train_cmd->parsed()) return cmd_train(cfg, train_data, train_out, force);
        if (prune_cmd->parsed()) return cmd_prune(cfg, prune_data, prune_in, prune_out, force);
        if (eval_cmd->parsed())
            return cmd_eval(cfg, eval_data, eval_ckpt, eval_name, eval_prefix, force);
        if (compare_cmd->parsed())
            return cmd_compare(cfg, cmp_data, cmp_a, cmp_b, cmp_prune, cmp_prefix, force);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const MissingInputError& e) {
        std::cerr << "missing input: " << e.what() << "\n";
        return 3;
    } catch (const DataFormatError& e) {
        std::cerr << "data format error: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 5;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
