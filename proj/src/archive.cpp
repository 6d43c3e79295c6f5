#include "mmf/archive.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mmf {

namespace {

constexpr const char* kMagic = "MMFARCHIVE v1";

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string task_name(TaskKind t) {
    return t == TaskKind::Regression ? "regression" : "classification";
}

[[noreturn]] void bad(const std::string& why) {
    throw ArchiveMismatch("archive: " + why);
}

}  // namespace

void save_model(MmfModel& model, const std::filesystem::path& path) {
    std::ostringstream out;
    const ModelConfig& c = model.cfg;
    out << kMagic << "\n";
    out << "config d=" << c.d << " cheb_k=" << c.cheb_k << " heads=" << c.heads
        << " head_dim=" << c.head_dim << " set2set_steps=" << c.set2set_steps
        << " max_text_tokens=" << c.max_text_tokens << " targets=" << c.targets
        << " task=" << task_name(c.task) << " seg_off=" << int(c.seg_off)
        << " peg_off=" << int(c.peg_off) << " moe_off=" << int(c.moe_off) << "\n";

    out << "mean";
    for (double v : model.standardizer.mean) out << " " << fmt17(v);
    out << "\nstddev";
    for (double v : model.standardizer.stddev) out << " " << fmt17(v);
    out << "\n";

    const auto& tokens = model.vocab.tokens();
    out << "vocab " << tokens.size() << "\n";
    for (const auto& t : tokens) out << t << "\n";

    std::vector<ParamTensor*> params = model.trainable_params();
    out << "params " << params.size() << "\n";
    std::uint64_t checksum = 14695981039346656037ULL;
    for (ParamTensor* p : params) {
        std::ostringstream line;
        line << "param " << p->name << " " << p->rows() << " " << p->cols();
        for (std::size_t i = 0; i < p->rows(); ++i)
            for (std::size_t j = 0; j < p->cols(); ++j)
                line << " " << fmt17(p->value(i, j));
        checksum = fnv1a(checksum, line.str());
        out << line.str() << "\n";
    }
    char sumbuf[24];
    std::snprintf(sumbuf, sizeof(sumbuf), "%016" PRIx64, checksum);
    out << "checksum " << sumbuf << "\n";

    std::ofstream file(path);
    if (!file) bad("cannot write " + path.string());
    file << out.str();
}

MmfModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line) || line != kMagic) bad("bad header");

    if (!std::getline(in, line)) bad("missing config line");
    ModelConfig cfg;
    {
        std::istringstream ss(line);
        std::string tag, kv;
        ss >> tag;
        if (tag != "config") bad("missing config line");
        while (ss >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) bad("malformed config entry " + kv);
            std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "d") cfg.d = std::stoul(val);
            else if (key == "cheb_k") cfg.cheb_k = std::stoul(val);
            else if (key == "heads") cfg.heads = std::stoul(val);
            else if (key == "head_dim") cfg.head_dim = std::stoul(val);
            else if (key == "set2set_steps") cfg.set2set_steps = std::stoul(val);
            else if (key == "max_text_tokens") cfg.max_text_tokens = std::stoul(val);
            else if (key == "targets") cfg.targets = std::stoul(val);
            else if (key == "task")
                cfg.task = val == "regression" ? TaskKind::Regression
                                               : TaskKind::BinaryClassification;
            else if (key == "seg_off") cfg.seg_off = val == "1";
            else if (key == "peg_off") cfg.peg_off = val == "1";
            else if (key == "moe_off") cfg.moe_off = val == "1";
            else bad("unknown config key " + key);
        }
    }

    auto read_stats = [&](const char* tag) {
        if (!std::getline(in, line)) bad(std::string("missing ") + tag);
        std::istringstream ss(line);
        std::string got;
        ss >> got;
        if (got != tag) bad(std::string("missing ") + tag);
        std::vector<double> out;
        double v;
        while (ss >> v) out.push_back(v);
        if (out.size() != cfg.targets) bad(std::string(tag) + " width mismatch");
        return out;
    };
    std::vector<double> mean = read_stats("mean");
    std::vector<double> stddev = read_stats("stddev");

    if (!std::getline(in, line)) bad("missing vocab header");
    std::size_t vocab_count = 0;
    {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag >> vocab_count;
        if (tag != "vocab") bad("missing vocab header");
    }
    std::vector<std::string> tokens;
    tokens.reserve(vocab_count);
    for (std::size_t i = 0; i < vocab_count; ++i) {
        if (!std::getline(in, line)) bad("truncated vocabulary");
        tokens.push_back(line);
    }

    MmfModel model(cfg, Vocabulary::from_tokens(std::move(tokens), cfg.max_text_tokens), 0);
    model.standardizer.mean = std::move(mean);
    model.standardizer.stddev = std::move(stddev);

    std::map<std::string, ParamTensor*> by_name;
    for (ParamTensor* p : model.trainable_params()) by_name[p->name] = p;

    if (!std::getline(in, line)) bad("missing params header");
    std::size_t param_count = 0;
    {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag >> param_count;
        if (tag != "params") bad("missing params header");
    }
    if (param_count != by_name.size()) bad("parameter count disagrees with config");

    std::uint64_t checksum = 14695981039346656037ULL;
    for (std::size_t n = 0; n < param_count; ++n) {
        if (!std::getline(in, line)) bad("truncated parameter table");
        checksum = fnv1a(checksum, line);
        std::istringstream ss(line);
        std::string tag, name;
        std::size_t rows = 0, cols = 0;
        ss >> tag >> name >> rows >> cols;
        if (tag != "param") bad("malformed parameter record");
        auto it = by_name.find(name);
        if (it == by_name.end()) bad("unexpected parameter " + name);
        ParamTensor* p = it->second;
        if (rows != p->rows() || cols != p->cols())
            bad("shape mismatch for " + name);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                if (!(ss >> p->value(i, j))) bad("truncated values for " + name);
        by_name.erase(it);
    }
    if (!by_name.empty()) bad("missing parameter " + by_name.begin()->first);

    if (!std::getline(in, line)) bad("missing checksum");
    {
        std::istringstream ss(line);
        std::string tag, hex;
        ss >> tag >> hex;
        char sumbuf[24];
        std::snprintf(sumbuf, sizeof(sumbuf), "%016" PRIx64, checksum);
        if (tag != "checksum" || hex != sumbuf) bad("checksum mismatch");
    }
    return model;
}

}  // namespace mmf
