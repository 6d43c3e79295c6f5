#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "mmf/llm.hpp"
#include "mmf/train.hpp"

namespace mmf {

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything a run needs, mirrored 1:1 into the plain key=value config file.
// Every file default equals the in-code default.
struct RunConfig {
    TrainConfig train;
    ProviderConfig provider;
    std::string dataset;
    std::string cache_dir = "llm_cache";
    std::string archive = "model.mmf";
};

namespace detail_config {

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw ConfigError("config: bad boolean for key " + key);
}

template <typename T>
T parse_num(const std::string& key, const std::string& v) {
    std::istringstream ss(v);
    T out{};
    if (!(ss >> out)) throw ConfigError("config: bad value for key " + key);
    std::string rest;
    if (ss >> rest) throw ConfigError("config: bad value for key " + key);
    return out;
}

}  // namespace detail_config

inline void apply_config_entry(RunConfig& rc, const std::string& key,
                               const std::string& value) {
    using namespace detail_config;
    TrainConfig& t = rc.train;
    ProviderConfig& p = rc.provider;
    if (key == "batch_size") t.batch_size = parse_num<std::size_t>(key, value);
    else if (key == "epochs") t.epochs = parse_num<std::size_t>(key, value);
    else if (key == "d") t.d = parse_num<std::size_t>(key, value);
    else if (key == "lr") t.lr = parse_num<double>(key, value);
    else if (key == "plateau_patience") t.plateau_patience = parse_num<std::size_t>(key, value);
    else if (key == "lr_factor") t.lr_factor = parse_num<double>(key, value);
    else if (key == "early_stop_patience")
        t.early_stop_patience = parse_num<std::size_t>(key, value);
    else if (key == "cheb_k") t.cheb_k = parse_num<std::size_t>(key, value);
    else if (key == "heads") t.heads = parse_num<std::size_t>(key, value);
    else if (key == "head_dim") t.head_dim = parse_num<std::size_t>(key, value);
    else if (key == "set2set_steps") t.set2set_steps = parse_num<std::size_t>(key, value);
    else if (key == "max_text_tokens") t.max_text_tokens = parse_num<std::size_t>(key, value);
    else if (key == "icl_k") t.icl_k = parse_num<std::size_t>(key, value);
    else if (key == "icl_strategy") {
        if (value == "random") t.icl_strategy = SampleStrategy::Random;
        else if (value == "scaffold") t.icl_strategy = SampleStrategy::Scaffold;
        else throw ConfigError("config: bad value for key icl_strategy");
    } else if (key == "train_frac") t.train_frac = parse_num<double>(key, value);
    else if (key == "valid_frac") t.valid_frac = parse_num<double>(key, value);
    else if (key == "test_frac") t.test_frac = parse_num<double>(key, value);
    else if (key == "seg_off") t.seg_off = parse_bool(key, value);
    else if (key == "peg_off") t.peg_off = parse_bool(key, value);
    else if (key == "moe_off") t.moe_off = parse_bool(key, value);
    else if (key == "seed") t.seed = parse_num<std::uint64_t>(key, value);
    else if (key == "provider") {
        if (value == "mock") p.provider = Provider::Mock;
        else if (value == "http") p.provider = Provider::Http;
        else throw ConfigError("config: bad value for key provider");
    } else if (key == "endpoint") p.endpoint = value;
    else if (key == "model") p.model = value;
    else if (key == "api_key_env") p.api_key_env = value;
    else if (key == "top_p") p.top_p = parse_num<double>(key, value);
    else if (key == "temperature") p.temperature = parse_num<double>(key, value);
    else if (key == "max_response_tokens")
        p.max_response_tokens = parse_num<int>(key, value);
    else if (key == "timeout_ms") p.timeout_ms = parse_num<int>(key, value);
    else if (key == "retries") p.retries = parse_num<int>(key, value);
    else if (key == "prompt_char_budget")
        p.prompt_char_budget = parse_num<std::size_t>(key, value);
    else if (key == "dataset") rc.dataset = value;
    else if (key == "cache_dir") rc.cache_dir = value;
    else if (key == "archive") rc.archive = value;
    else throw ConfigError("config: unknown key " + key);
}

// Lines are "key=value"; blank lines and # comments are skipped.
inline void load_config_text(RunConfig& rc, std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: missing '=' in line \"" + line + "\"");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto strip = [](std::string s) {
            std::size_t x = s.find_first_not_of(" \t");
            if (x == std::string::npos) return std::string();
            std::size_t y = s.find_last_not_of(" \t");
            return s.substr(x, y - x + 1);
        };
        apply_config_entry(rc, strip(key), strip(value));
    }
}

inline void load_config_file(RunConfig& rc, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    load_config_text(rc, in);
}

inline std::string dump_config(const RunConfig& rc) {
    const TrainConfig& t = rc.train;
    const ProviderConfig& p = rc.provider;
    std::ostringstream out;
    out << "batch_size=" << t.batch_size << "\n";
    out << "epochs=" << t.epochs << "\n";
    out << "d=" << t.d << "\n";
    out << "lr=" << t.lr << "\n";
    out << "plateau_patience=" << t.plateau_patience << "\n";
    out << "lr_factor=" << t.lr_factor << "\n";
    out << "early_stop_patience=" << t.early_stop_patience << "\n";
    out << "cheb_k=" << t.cheb_k << "\n";
    out << "heads=" << t.heads << "\n";
    out << "head_dim=" << t.head_dim << "\n";
    out << "set2set_steps=" << t.set2set_steps << "\n";
    out << "max_text_tokens=" << t.max_text_tokens << "\n";
    out << "icl_k=" << t.icl_k << "\n";
    out << "icl_strategy="
        << (t.icl_strategy == SampleStrategy::Random ? "random" : "scaffold") << "\n";
    out << "train_frac=" << t.train_frac << "\n";
    out << "valid_frac=" << t.valid_frac << "\n";
    out << "test_frac=" << t.test_frac << "\n";
    out << "seg_off=" << int(t.seg_off) << "\n";
    out << "peg_off=" << int(t.peg_off) << "\n";
    out << "moe_off=" << int(t.moe_off) << "\n";
    out << "seed=" << t.seed << "\n";
    out << "provider=" << (p.provider == Provider::Mock ? "mock" : "http") << "\n";
    out << "endpoint=" << p.endpoint << "\n";
    out << "model=" << p.model << "\n";
    out << "api_key_env=" << p.api_key_env << "\n";
    out << "top_p=" << p.top_p << "\n";
    out << "temperature=" << p.temperature << "\n";
    out << "max_response_tokens=" << p.max_response_tokens << "\n";
    out << "timeout_ms=" << p.timeout_ms << "\n";
    out << "retries=" << p.retries << "\n";
    out << "prompt_char_budget=" << p.prompt_char_budget << "\n";
    out << "dataset=" << rc.dataset << "\n";
    out << "cache_dir=" << rc.cache_dir << "\n";
    out << "archive=" << rc.archive << "\n";
    return out.str();
}

}  // namespace mmf
