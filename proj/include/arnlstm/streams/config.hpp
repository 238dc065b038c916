#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "arnlstm/relation/relation.hpp"
#include "arnlstm/skeleton/pose.hpp"
#include "arnlstm/tdlstm/lstm.hpp"

namespace arnlstm {

/// Flat key=value configuration. Lines starting with '#' and blank lines are
/// ignored; keys are unique. Serialization sorts keys, so equal configs
/// produce identical bytes.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text, const std::string& source = "<config>") {
        KeyValueConfig cfg;
        std::size_t line_no = 0, pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            std::string line(text.substr(pos, end - pos));
            pos = end + 1;
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string trimmed = trim(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value, got '" + trimmed + "'");
            }
            const std::string key = trim(trimmed.substr(0, eq));
            if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
            if (!cfg.values_.emplace(key, trim(trimmed.substr(eq + 1))).second) {
                throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
            }
        }
        return cfg;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    std::string serialize() const {
        std::string out;
        for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write config file '" + path + "'");
        out << serialize();
    }

    bool contains(const std::string& key) const { return values_.contains(key); }
    const std::string& get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
        return it->second;
    }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    void merge(const KeyValueConfig& over) {
        for (const auto& [k, v] : over.values_) values_[k] = v;
    }
    const std::map<std::string, std::string>& values() const { return values_; }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t");
        if (b == std::string::npos) return "";
        return s.substr(b, s.find_last_not_of(" \t") - b + 1);
    }

private:
    std::map<std::string, std::string> values_;
};

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& key, const std::string& s) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + s + "'");
    }
    return v;
}

inline std::size_t parse_count(const std::string& key, const std::string& s) {
    std::size_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + s + "'");
    }
    return v;
}

inline bool parse_switch(const std::string& key, const std::string& s) {
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw ConfigError("config key '" + key + "': expected on/off, got '" + s + "'");
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t end = s.find(',', pos);
        if (end == std::string::npos) end = s.size();
        std::string item = KeyValueConfig::trim(s.substr(pos, end - pos));
        if (!item.empty()) out.push_back(item);
        pos = end + 1;
    }
    return out;
}

template <class T, class F>
std::string join_list(const std::vector<T>& items, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + fmt(items[i]);
    return out;
}

enum class StreamKind { joint, temporal, fused };

inline std::string to_string(StreamKind k) {
    switch (k) {
    case StreamKind::joint: return "joint";
    case StreamKind::temporal: return "temporal";
    case StreamKind::fused: return "fused";
    }
    return "?";
}

inline StreamKind parse_stream(const std::string& s) {
    if (s == "joint") return StreamKind::joint;
    if (s == "temporal") return StreamKind::temporal;
    if (s == "fused") return StreamKind::fused;
    throw ConfigError("unknown stream '" + s + "' (expected joint, temporal, fused)");
}

/// Reduction of the top hidden-state sequence to one vector per sample.
enum class TemporalPool { mean, gaussian };

inline std::string to_string(TemporalPool p) { return p == TemporalPool::mean ? "mean" : "gaussian"; }

inline TemporalPool parse_temporal_pool(const std::string& s) {
    if (s == "mean") return TemporalPool::mean;
    if (s == "gaussian") return TemporalPool::gaussian;
    throw ConfigError("unknown temporal pool '" + s + "' (expected mean, gaussian)");
}

inline Activation parse_activation(const std::string& s) {
    if (s == "identity" || s == "linear") return Activation::identity;
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation '" + s + "'");
}

inline std::string to_string(Activation a) {
    switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

/// Architecture of one ARN-LSTM model.
struct ModelConfig {
    StreamKind stream = StreamKind::fused;
    std::vector<ModalityKind> joint_modalities{ModalityKind::joint, ModalityKind::joint_motion};
    std::vector<ModalityKind> temporal_modalities{ModalityKind::joint_motion, ModalityKind::bone_motion};
    std::size_t classes = 2;
    std::size_t joints = 8;
    std::size_t seq_len = 20;
    RelationKind relation = RelationKind::fused;
    PoolKind pool = PoolKind::average;
    PairReduce pair_reduce = PairReduce::mean;
    std::vector<std::size_t> encoder_widths{128, 128};
    std::string prune_at_layer;
    std::size_t head_width = 128;
    std::size_t lstm_hidden = 500;
    std::size_t lstm_depth = 2;
    double dropout = 0.1;
    bool gaussian = true;
    /// 0 selects seq_len / 6.
    double sigma = 0.0;
    TemporalPool temporal_pool = TemporalPool::mean;
    /// Weight of the per-step auxiliary loss in the joint stream; 0 disables it.
    double aux_loss_weight = 0.3;
    /// Start classifier and fusion heads at zero (uniform initial predictions).
    bool zero_init_heads = true;
    /// Per-column input standardization with statistics from the training split.
    bool standardize = true;

    bool has_joint_stream() const { return stream != StreamKind::temporal; }
    bool has_temporal_stream() const { return stream != StreamKind::joint; }

    void validate() const {
        if (classes < 2) throw ConfigError("model needs at least 2 classes");
        if (joints < 1) throw ConfigError("model needs at least 1 joint");
        if (seq_len < 2) throw ConfigError("seq_len must be at least 2");
        if (encoder_widths.empty()) throw ConfigError("encoder needs at least one layer");
        for (auto w : encoder_widths)
            if (w == 0) throw ConfigError("encoder widths must be positive");
        if (head_width == 0 || lstm_hidden == 0 || lstm_depth == 0) {
            throw ConfigError("head width, LSTM width and LSTM depth must be positive");
        }
        if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must lie in [0, 1)");
        if (!(sigma >= 0)) throw ConfigError("sigma must be >= 0");
        if (!(aux_loss_weight >= 0)) throw ConfigError("aux_loss_weight must be >= 0");
        if (has_joint_stream() && joint_modalities.empty()) throw ConfigError("joint stream needs a modality");
        if (has_temporal_stream() && temporal_modalities.empty()) throw ConfigError("temporal stream needs a modality");
    }

    /// Override fields from any keys present in `kv`.
    void apply(const KeyValueConfig& kv) {
        auto has = [&](const char* k) { return kv.contains(k); };
        auto str = [&](const char* k) { return kv.get(k); };
        auto modalities = [&](const char* k) {
            std::vector<ModalityKind> out;
            for (const auto& s : split_list(str(k))) out.push_back(parse_modality(s));
            return out;
        };
        if (has("stream")) stream = parse_stream(str("stream"));
        if (has("joint_modalities")) joint_modalities = modalities("joint_modalities");
        if (has("temporal_modalities")) temporal_modalities = modalities("temporal_modalities");
        if (has("classes")) classes = parse_count("classes", str("classes"));
        if (has("joints")) joints = parse_count("joints", str("joints"));
        if (has("seq_len")) seq_len = parse_count("seq_len", str("seq_len"));
        if (has("relation")) relation = parse_relation(str("relation"));
        if (has("pool")) pool = parse_pool(str("pool"));
        if (has("pair_reduce")) pair_reduce = parse_pair_reduce(str("pair_reduce"));
        if (has("encoder_widths")) {
            encoder_widths.clear();
            for (const auto& s : split_list(str("encoder_widths"))) encoder_widths.push_back(parse_count("encoder_widths", s));
        }
        if (has("prune_at_layer")) prune_at_layer = str("prune_at_layer");
        if (has("head_width")) head_width = parse_count("head_width", str("head_width"));
        if (has("lstm_hidden")) lstm_hidden = parse_count("lstm_hidden", str("lstm_hidden"));
        if (has("lstm_depth")) lstm_depth = parse_count("lstm_depth", str("lstm_depth"));
        if (has("dropout")) dropout = parse_double("dropout", str("dropout"));
        if (has("gaussian")) gaussian = parse_switch("gaussian", str("gaussian"));
        if (has("sigma")) sigma = parse_double("sigma", str("sigma"));
        if (has("temporal_pool")) temporal_pool = parse_temporal_pool(str("temporal_pool"));
        if (has("aux_loss_weight")) aux_loss_weight = parse_double("aux_loss_weight", str("aux_loss_weight"));
        if (has("zero_init_heads")) zero_init_heads = parse_switch("zero_init_heads", str("zero_init_heads"));
        if (has("standardize")) standardize = parse_switch("standardize", str("standardize"));
    }

    void store(KeyValueConfig& kv) const {
        auto mods = [](const std::vector<ModalityKind>& m) {
            return join_list(m, [](ModalityKind k) { return to_string(k); });
        };
        kv.set("stream", to_string(stream));
        kv.set("joint_modalities", mods(joint_modalities));
        kv.set("temporal_modalities", mods(temporal_modalities));
        kv.set("classes", std::to_string(classes));
        kv.set("joints", std::to_string(joints));
        kv.set("seq_len", std::to_string(seq_len));
        kv.set("relation", to_string(relation));
        kv.set("pool", to_string(pool));
        kv.set("pair_reduce", to_string(pair_reduce));
        kv.set("encoder_widths", join_list(encoder_widths, [](std::size_t w) { return std::to_string(w); }));
        kv.set("prune_at_layer", prune_at_layer);
        kv.set("head_width", std::to_string(head_width));
        kv.set("lstm_hidden", std::to_string(lstm_hidden));
        kv.set("lstm_depth", std::to_string(lstm_depth));
        kv.set("dropout", format_double(dropout));
        kv.set("gaussian", gaussian ? "on" : "off");
        kv.set("sigma", format_double(sigma));
        kv.set("temporal_pool", to_string(temporal_pool));
        kv.set("aux_loss_weight", format_double(aux_loss_weight));
        kv.set("zero_init_heads", zero_init_heads ? "on" : "off");
        kv.set("standardize", standardize ? "on" : "off");
    }

    static ModelConfig from(const KeyValueConfig& kv) {
        ModelConfig cfg;
        cfg.apply(kv);
        return cfg;
    }
};

} // namespace arnlstm
