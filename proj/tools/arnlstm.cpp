// arnlstm: synthesize data, train, evaluate, cross-validate and gradient-check
// ARN-LSTM models from the command line.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error, 3 data error,
// 4 numerical failure (including a failed gradient check).

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "arnlstm/arnlstm.hpp"

namespace fs = std::filesystem;
using namespace arnlstm;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kNumeric = 4 };

const char* const kRunConfigFile = "run_config.txt";

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

// Model and training flags; each maps onto one run-config key.
const std::vector<FlagSpec>& model_flags() {
    static const std::vector<FlagSpec> specs{
        {"--stream", "stream", "joint | temporal | fused"},
        {"--relation", "relation", "inward | outward | inward_outward"},
        {"--pool", "pool", "avg | sum | max | concat (combines the two inward directions)"},
        {"--pair-reduce", "pair_reduce", "mean | sum over joint pairs"},
        {"--gaussian", "gaussian", "on | off"},
        {"--sigma", "sigma", "Gaussian frame-weight sigma; 0 selects seq_len/6"},
        {"--modalities", "modalities", "joint, bone, joint-motion, bone-motion (comma list)"},
        {"--ensemble-weights", "ensemble_weights", "one weight per --modalities entry; trains one model per modality"},
        {"--encoder-widths", "encoder_widths", "pair-encoder layer widths (comma list)"},
        {"--prune-at-layer", "prune_at_layer", "truncate the pair encoder at this layer name"},
        {"--head-width", "head_width", "relation head width"},
        {"--lstm-hidden", "lstm_hidden", "LSTM width"},
        {"--lstm-depth", "lstm_depth", "LSTM layer count"},
        {"--seq-len", "seq_len", "frames sampled per sequence"},
        {"--temporal-pool", "temporal_pool", "mean | gaussian"},
        {"--aux-weight", "aux_loss_weight", "joint-stream per-step loss weight"},
        {"--zero-init-heads", "zero_init_heads", "on | off"},
        {"--standardize", "standardize", "on | off: per-column input standardization from the training split"},
        {"--lr", "lr", "Adam learning rate"},
        {"--batch", "batch", "mini-batch size"},
        {"--dropout", "dropout", "dropout rate"},
        {"--patience", "patience", "early-stopping patience (epochs)"},
        {"--max-epochs", "max_epochs", "epoch limit"},
        {"--val-fraction", "val_fraction", "validation share of the training data"},
        {"--loss-tie-break", "loss_tie_break", "on | off: lower validation loss breaks accuracy ties"},
    };
    return specs;
}

KeyValueConfig default_config() {
    KeyValueConfig kv;
    ModelConfig{}.store(kv);
    TrainConfig{}.store(kv);
    kv.set("folds", "5");
    return kv;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k;
        const KeyValueConfig defaults = default_config();
        for (const auto& [key, _] : defaults.values()) k.insert(key);
        for (const char* extra : {"data", "topo", "ensemble_modalities", "ensemble_weights"}) k.insert(extra);
        return k;
    }();
    return keys;
}

/// String-valued flags collected as run-config overrides.
class FlagSet {
public:
    void add(CLI::App* app, const FlagSpec& spec, const std::string& default_text = "") {
        CLI::Option* o = app->add_option(spec.flag, storage_[spec.key], spec.help);
        if (!default_text.empty()) o->default_str(default_text);
        options_.emplace_back(o, spec.key);
    }
    void add_model_flags(CLI::App* app) {
        const KeyValueConfig defaults = default_config();
        for (const auto& spec : model_flags()) {
            add(app, spec, defaults.contains(spec.key) ? defaults.get(spec.key) : "");
        }
    }
    std::map<std::string, std::string> given() const {
        std::map<std::string, std::string> out;
        for (const auto& [opt, key] : options_)
            if (opt->count() > 0) out[key] = storage_.at(key);
        return out;
    }

private:
    std::map<std::string, std::string> storage_;
    std::vector<std::pair<CLI::Option*, std::string>> options_;
};

struct Common {
    std::string config;
    std::string out_dir;
    FlagSet flags;

    void add(CLI::App* app, bool out_dir_required = true) {
        flags.add(app, {"--data", "data", "dataset CSV"});
        flags.add(app, {"--topo", "topo", "topology sidecar file or preset (ntu25, spine_armN)"});
        flags.add(app, {"--seed", "seed", "root seed; every component seed derives from it"}, "0");
        app->add_option("--config", config, "key=value run config; flags override its values");
        auto* o = app->add_option("--out-dir", out_dir, "artifact directory");
        if (out_dir_required) o->required();
    }
};

/// defaults ← config file ← flags. --modalities is resolved against the
/// stream kind (or the ensemble member list) into concrete keys.
KeyValueConfig resolve(const Common& common) {
    KeyValueConfig kv = default_config();
    if (!common.config.empty()) {
        const KeyValueConfig file = KeyValueConfig::load(common.config);
        for (const auto& [key, _] : file.values()) {
            if (!known_keys().contains(key)) throw ConfigError(common.config + ": unknown key '" + key + "'");
        }
        kv.merge(file);
    }
    auto given = common.flags.given();
    std::string modalities;
    if (auto it = given.find("modalities"); it != given.end()) {
        modalities = it->second;
        given.erase(it);
    }
    for (const auto& [key, value] : given) kv.set(key, value);
    if (!modalities.empty()) {
        if (kv.contains("ensemble_weights")) {
            kv.set("ensemble_modalities", modalities);
        } else {
            const StreamKind stream = parse_stream(kv.get("stream"));
            if (stream != StreamKind::temporal) kv.set("joint_modalities", modalities);
            if (stream != StreamKind::joint) kv.set("temporal_modalities", modalities);
        }
    }
    if (kv.contains("ensemble_weights") && !kv.contains("ensemble_modalities")) {
        throw ConfigError("--ensemble-weights needs --modalities listing the members");
    }
    return kv;
}

std::uint64_t seed_of(const KeyValueConfig& kv) { return parse_count("seed", kv.get("seed")); }

std::vector<SkeletonSequence> load_dataset(const KeyValueConfig& kv) {
    if (!kv.contains("data") || kv.get("data").empty()) throw ConfigError("no dataset given (--data)");
    auto data = load_csv(kv.get("data"));
    if (data.empty()) throw DataError("dataset '" + kv.get("data") + "' has no sequences");
    return data;
}

/// Fill classes/joints from the data unless the configuration fixed them.
void adopt_data_shape(KeyValueConfig& kv, const std::vector<SkeletonSequence>& data, bool explicit_classes,
                      bool explicit_joints) {
    int max_label = 0;
    for (const auto& s : data) max_label = std::max(max_label, s.label);
    if (!explicit_classes) kv.set("classes", std::to_string(max_label + 1));
    if (!explicit_joints) kv.set("joints", std::to_string(data.front().joints()));
}

BoneTopology load_topology(const KeyValueConfig& kv, std::size_t joints) {
    const std::string topo = kv.contains("topo") ? kv.get("topo") : "";
    if (topo.empty()) return BoneTopology::spine_and_arm(joints);
    if (fs::exists(topo)) return BoneTopology::read(topo);
    return BoneTopology::preset(topo);
}

bool explicitly_set(const Common& common, const std::string& key) {
    if (common.flags.given().contains(key)) return true;
    return !common.config.empty() && KeyValueConfig::load(common.config).contains(key);
}

struct MemberSpec {
    std::string tag; // file suffix; empty for a single model
    ModelConfig config;
    std::uint64_t seed;
};

std::vector<MemberSpec> member_specs(const KeyValueConfig& kv) {
    const ModelConfig base = ModelConfig::from(kv);
    const std::uint64_t seed = seed_of(kv);
    if (!kv.contains("ensemble_modalities")) return {{"", base, derive_seed(seed, "model")}};
    std::vector<MemberSpec> out;
    for (const auto& m : split_list(kv.get("ensemble_modalities"))) {
        const ModalityKind kind = parse_modality(m);
        out.push_back({to_string(kind), member_config(base, kind), derive_seed(seed, "model/" + to_string(kind))});
    }
    return out;
}

std::vector<double> ensemble_weights(const KeyValueConfig& kv, std::size_t members) {
    if (!kv.contains("ensemble_weights")) return uniform_weights(members);
    std::vector<double> w;
    for (const auto& s : split_list(kv.get("ensemble_weights"))) w.push_back(parse_double("ensemble_weights", s));
    return simplex_weights(w, members);
}

std::string member_file(const std::string& stem, const std::string& tag, const std::string& ext) {
    return tag.empty() ? stem + ext : stem + "_" + tag + ext;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

void write_eval_artifacts(const fs::path& dir, const EvalReport& r, const nlohmann::ordered_json& json) {
    report::write_text((dir / "report.json").string(), json.dump(2) + "\n");
    report::write_text((dir / "per_class.csv").string(), report::per_class_csv(r));
    report::write_text((dir / "confusion.svg").string(), report::confusion_svg(r));
    report::write_text((dir / "accuracy.svg").string(), report::accuracy_bar_svg(r));
}

// ---------------------------------------------------------------- synth-gen

struct SynthArgs {
    std::size_t classes = 6, per_class = 40, frames = 20, joints = 8;
    double noise = 0.02;
    std::uint64_t seed = 0;
    std::string data, out_dir;
};

int cmd_synth_gen(const SynthArgs& a) {
    SyntheticConfig cfg;
    cfg.classes = SyntheticConfig::first_families(a.classes);
    cfg.per_class = a.per_class;
    cfg.frames = a.frames;
    cfg.joints = a.joints;
    cfg.noise = a.noise;
    cfg.seed = a.seed;
    cfg.validate();
    const auto data = generate_synthetic(cfg);
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    const std::string csv = a.data.empty() ? (dir / "dataset.csv").string() : a.data;
    write_csv(csv, data);
    BoneTopology::spine_and_arm(a.joints).write((dir / "topology.txt").string());
    KeyValueConfig kv;
    kv.set("synth_classes", std::to_string(a.classes));
    kv.set("per_class", std::to_string(a.per_class));
    kv.set("frames", std::to_string(a.frames));
    kv.set("joints", std::to_string(a.joints));
    kv.set("noise", format_double(a.noise));
    kv.set("seed", std::to_string(a.seed));
    kv.save((dir / kRunConfigFile).string());
    for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
        std::cout << "class " << c << " (" << to_string(cfg.classes[c]) << "): " << cfg.per_class << " sequences\n";
    }
    std::cout << "wrote " << data.size() << " sequences to " << csv << "\n";
    return kOk;
}

// ---------------------------------------------------------------- train

int cmd_train(const Common& common) {
    KeyValueConfig kv = resolve(common);
    const auto data = load_dataset(kv);
    adopt_data_shape(kv, data, explicitly_set(common, "classes"), explicitly_set(common, "joints"));
    TrainConfig tc;
    tc.apply(kv);
    const std::uint64_t seed = seed_of(kv);
    tc.seed = derive_seed(seed, "train");
    const BoneTopology topo = load_topology(kv, parse_count("joints", kv.get("joints")));
    const auto members = member_specs(kv);
    if (members.size() > 1) ensemble_weights(kv, members.size());

    std::vector<int> labels;
    for (const auto& s : data) labels.push_back(s.label);
    const auto split = stratified_holdout(labels, all_indices(data.size()), tc.validation_fraction,
                                          derive_seed(seed, "holdout"));
    if (split.train.empty() || split.validation.empty()) throw DataError("dataset too small for a validation split");

    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    for (const auto& m : members) {
        auto model = make_model(m.config, m.seed);
        const auto prepared = model->prepare_all(data, topo);
        const TrainResult r = train(*model, prepared, split.train, split.validation, tc);
        checkpoint::save(model->params(), (dir / member_file("checkpoint", m.tag, ".bin")).string());
        report::write_text((dir / member_file("history", m.tag, ".csv")).string(), report::history_csv(r));
        std::cout << (m.tag.empty() ? "model" : "member " + m.tag) << ": " << r.history.size()
                  << " epochs, best epoch " << r.best_epoch << ", validation accuracy "
                  << report::fixed(100.0 * r.best_val_accuracy, 2) << "%\n";
    }
    kv.save((dir / kRunConfigFile).string());
    return kOk;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const Common& common, const std::string& model_dir) {
    KeyValueConfig kv = KeyValueConfig::load((fs::path(model_dir) / kRunConfigFile).string());
    for (const auto& [key, value] : common.flags.given())
        if (key == "data" || key == "topo") kv.set(key, value);
    const auto data = load_dataset(kv);
    const std::size_t joints = parse_count("joints", kv.get("joints"));
    const BoneTopology topo = load_topology(kv, joints);
    const auto members = member_specs(kv);
    const auto weights = ensemble_weights(kv, members.size());
    Ensemble ensemble;
    std::vector<PreparedDataset> prepared;
    for (const auto& m : members) {
        auto model = make_model(m.config, m.seed);
        const std::string ckpt = (fs::path(model_dir) / member_file("checkpoint", m.tag, ".bin")).string();
        try {
            checkpoint::load(model->params(), ckpt);
        } catch (const ShapeError& e) {
            throw ConfigError("checkpoint '" + ckpt + "' does not match its run config: " + e.what());
        }
        prepared.push_back(model->prepare_all(data, topo));
        ensemble.members.push_back(std::move(model));
    }
    ensemble.weights = weights;
    const auto idx = all_indices(data.size());
    std::vector<std::size_t> labels;
    for (const auto& s : data) labels.push_back(static_cast<std::size_t>(s.label));
    const EvalReport r = evaluate_probabilities(ensemble.predict(prepared, idx), labels);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_eval_artifacts(dir, r, report::eval_json(r));
    kv.save((dir / kRunConfigFile).string());
    std::cout << "accuracy " << report::fixed(100.0 * r.accuracy, 2) << "% over " << r.samples << " samples, loss "
              << report::fixed(r.mean_loss, 4) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- cross-validate

int cmd_cross_validate(const Common& common) {
    KeyValueConfig kv = resolve(common);
    if (kv.contains("ensemble_modalities")) throw ConfigError("cross-validate runs single models; use train for ensembles");
    const auto data = load_dataset(kv);
    adopt_data_shape(kv, data, explicitly_set(common, "classes"), explicitly_set(common, "joints"));
    const ModelConfig mc = ModelConfig::from(kv);
    TrainConfig tc;
    tc.apply(kv);
    const std::uint64_t seed = seed_of(kv);
    tc.seed = derive_seed(seed, "train");
    const BoneTopology topo = load_topology(kv, mc.joints);
    const std::size_t folds = parse_count("folds", kv.get("folds"));
    const FoldSplit split = stratified_folds(data, folds, derive_seed(seed, "folds"));
    const auto cv = cross_validate(
        [&](std::size_t f) { return make_model(mc, derive_seed(seed, "model/fold" + std::to_string(f))); }, data, topo,
        split, tc);

    std::vector<EvalReport> tests;
    for (const auto& f : cv.folds) tests.push_back(f.test);
    const EvalReport overall = combine_reports(tests);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    nlohmann::ordered_json json = report::cv_json(cv);
    json["overall"] = report::eval_json(overall);
    write_eval_artifacts(dir, overall, json);
    report::write_text((dir / "fold_table.csv").string(), report::fold_table_csv(cv));
    for (const auto& f : cv.folds) {
        report::write_text((dir / ("history_fold" + std::to_string(f.fold + 1) + ".csv")).string(),
                           report::history_csv(f.training));
    }
    kv.save((dir / kRunConfigFile).string());
    std::cout << report::fold_table_csv(cv) << "mean accuracy " << report::fixed(100.0 * cv.mean_accuracy, 2)
              << "% (std " << report::fixed(100.0 * cv.std_accuracy, 2) << ")\n";
    return kOk;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const GradientSuiteConfig& cfg, const std::string& out_dir) {
    constexpr double kTolerance = 1e-4;
    const auto groups = run_gradient_suite(cfg);
    std::string table = "group,trials,coordinates,kinks,worst_rel_error,status\n";
    bool ok = true;
    for (const auto& g : groups) {
        const bool pass = g.worst_rel_error <= kTolerance;
        ok = ok && pass;
        char err[32];
        std::snprintf(err, sizeof err, "%.3e", g.worst_rel_error);
        table += g.group + "," + std::to_string(g.trials) + "," + std::to_string(g.coordinates) + "," +
                 std::to_string(g.kinks) + "," + err + "," + (pass ? "PASS" : "FAIL") + "\n";
    }
    std::cout << table;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        report::write_text((fs::path(out_dir) / "gradcheck.csv").string(), table);
    }
    return ok ? kOk : kNumeric;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARN-LSTM skeleton interaction recognition"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth-gen", "Generate a synthetic two-person interaction dataset");
    synth_cmd->add_option("--classes", synth.classes, "number of interaction classes (2-6)")->capture_default_str();
    synth_cmd->add_option("--per-class", synth.per_class, "sequences per class")->capture_default_str();
    synth_cmd->add_option("--frames", synth.frames, "frames per sequence")->capture_default_str();
    synth_cmd->add_option("--joints", synth.joints, "joints per person")->capture_default_str();
    synth_cmd->add_option("--noise", synth.noise, "coordinate noise sigma")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
    synth_cmd->add_option("--data", synth.data, "output CSV path (default <out-dir>/dataset.csv)");
    synth_cmd->add_option("--out-dir", synth.out_dir, "artifact directory")->required();

    Common train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a model (or one model per ensemble member)");
    train_args.add(train_cmd);
    train_args.flags.add_model_flags(train_cmd);

    Common eval_args;
    std::string model_dir;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate trained checkpoints on a dataset");
    eval_args.add(eval_cmd);
    eval_cmd->add_option("--model-dir", model_dir, "directory written by train")->required();

    Common cv_args;
    auto* cv_cmd = app.add_subcommand("cross-validate", "Stratified k-fold cross-validation");
    cv_args.add(cv_cmd);
    cv_args.flags.add_model_flags(cv_cmd);
    cv_args.flags.add(cv_cmd, {"--folds", "folds", "fold count"}, "5");

    GradientSuiteConfig gc;
    std::string gc_out;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks per layer family");
    gc_cmd->add_option("--trials", gc.trials, "randomized configurations per family")->capture_default_str();
    gc_cmd->add_option("--seed", gc.seed, "seed")->capture_default_str();
    gc_cmd->add_option("--out-dir", gc_out, "write gradcheck.csv here");
    gc_cmd->add_option("--inject-grad-offset", gc.grad_offset, "")->group(""); // test hook

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*synth_cmd) return cmd_synth_gen(synth);
        if (*train_cmd) return cmd_train(train_args);
        if (*eval_cmd) return cmd_eval(eval_args, model_dir);
        if (*cv_cmd) return cmd_cross_validate(cv_args);
        if (*gc_cmd) return cmd_gradcheck(gc, gc_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const ShapeError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
