#include "mmf/llm.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <unistd.h>

#include <json.hpp>
#include <httplib.h>

#include "mmf/molgraph.hpp"

namespace mmf {

namespace {

const char* const kCotTemplates[14] = {
    "What is the molecular structure of this chemical SMILES string {smiles}? "
    "Could you describe its atoms, bonds, functional groups, and overall arrangement?",
    "What are the physical properties of this molecule such as its boiling point, "
    "melting point, and density?",
    "What is the solubility behavior of this molecule? In which solvents does it "
    "dissolve and which does it not?",
    "What is the chemical reactivity of this molecule? How does it interact with "
    "various reagents?",
    "Are there any common reactions that this molecule is known to undergo? Could "
    "you describe them?",
    "What is the mechanism of these reactions? Could you describe the various steps "
    "involved?",
    "Does this molecule exhibit any unique optical, electrical, or magnetic "
    "properties?",
    "Is this molecule chiral? If yes, how does its chirality influence its behavior "
    "or properties?",
    "Does this molecule form part of any important biological processes or pathways?",
    "Is this molecule synthesized industrially or in the laboratory? If yes, could "
    "you explain the process?",
    "Is this molecule found naturally? If yes, in what sources is it most commonly "
    "found?",
    "Are there any notable uses or applications for this molecule in medicine, "
    "industry, or other fields?",
    "What safety measures should be taken when handling this molecule?",
    "Are there any environmental impacts associated with the production, use, or "
    "disposal of this molecule?",
};

std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) {
    std::uint64_t h = 14695981039346656037ull ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string mock_response(const PromptBundle& bundle);

std::string http_post(const PromptBundle& bundle, const ProviderConfig& cfg) {
    if (cfg.api_key_env.empty())
        throw LlmError(LlmError::Kind::AuthMissing, "no api key env var configured");
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw LlmError(LlmError::Kind::AuthMissing,
                       "environment variable " + cfg.api_key_env + " is empty");

    // split endpoint into base URL and path
    std::string base = cfg.endpoint, path = "/";
    std::size_t scheme = base.find("://");
    std::size_t slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash != std::string::npos) {
        path = base.substr(slash);
        base = base.substr(0, slash);
    }

    nlohmann::json body = {
        {"model", cfg.model},
        {"prompt", bundle.text},
        {"top_p", cfg.top_p},
        {"temperature", cfg.temperature},
        {"max_tokens", cfg.max_response_tokens},
    };
    httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    std::string last_error;
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
        httplib::Client client(base);
        client.set_connection_timeout(0, cfg.timeout_ms * 1000);
        client.set_read_timeout(0, cfg.timeout_ms * 1000);
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (res && res->status >= 200 && res->status < 300) return res->body;
        last_error = res ? "http status " + std::to_string(res->status)
                         : "transport error: " + httplib::to_string(res.error());
    }
    throw LlmError(LlmError::Kind::NetworkFailure,
                   "provider call failed after retries: " + last_error);
}

}  // namespace

const char* const kIclInstruction =
    "Below are the input-output examples (SMILES strings-molecular properties pairs) "
    "for property prediction task. Predict the molecular properties for the query "
    "SMILES strings. Respond with a bare numeric list.";

std::vector<std::string> build_cot_prompts(const std::string& smiles) {
    std::vector<std::string> out;
    out.reserve(14);
    for (const char* tmpl : kCotTemplates) {
        std::string p = tmpl;
        std::size_t at = p.find("{smiles}");
        if (at != std::string::npos) p.replace(at, 8, smiles);
        out.push_back(std::move(p));
    }
    return out;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

PromptBundle build_icl_prompt(const std::string& query_smiles,
                              const std::vector<Demo>& demos,
                              const std::string& instruction,
                              std::size_t char_budget) {
    auto render = [&](std::size_t demo_count) {
        std::string text = instruction;
        text += "\n";
        for (std::size_t i = 0; i < demo_count; ++i) {
            text += demos[i].smiles + " -> ";
            for (std::size_t j = 0; j < demos[i].target.size(); ++j) {
                if (j > 0) text += ",";
                text += format_value(demos[i].target[j]);
            }
            text += "\n";
        }
        text += "QUERY: " + query_smiles + " ->";
        return text;
    };

    std::size_t keep = demos.size();
    std::string text = render(keep);
    // demos are ordered by descending similarity, so trimming from the back
    // drops the least similar first
    while (keep > 0 && text.size() > char_budget) {
        --keep;
        text = render(keep);
    }

    PromptBundle bundle;
    bundle.kind = PromptKind::Icl;
    bundle.text = std::move(text);
    bundle.smiles = query_smiles;
    bundle.demo_count = keep;
    bundle.dropped_demos = demos.size() - keep;
    return bundle;
}

PromptBundle make_cot_bundle(const std::string& smiles, const std::string& prompt_text) {
    PromptBundle bundle;
    bundle.kind = PromptKind::Cot;
    bundle.text = prompt_text;
    bundle.smiles = smiles;
    return bundle;
}

std::string compute_cache_key(const ProviderConfig& cfg, const std::string& prompt_text) {
    std::string tag = (cfg.provider == Provider::Mock ? "mock" : "http");
    std::string payload = tag + "\x1f" + cfg.model + "\x1f" + prompt_text;
    return hex64(fnv1a(payload, 0)) + hex64(fnv1a(payload, 0x517cc1b727220a95ull));
}

namespace {

std::string mock_response(const PromptBundle& bundle) {
    if (bundle.kind == PromptKind::Icl) {
        // component-wise mean of the demo target vectors
        std::vector<std::vector<double>> targets;
        std::istringstream lines(bundle.text);
        std::string line;
        while (std::getline(lines, line)) {
            std::size_t arrow = line.find(" -> ");
            if (arrow == std::string::npos || line.rfind("QUERY:", 0) == 0) continue;
            std::vector<double> vals;
            std::istringstream cells(line.substr(arrow + 4));
            std::string cell;
            while (std::getline(cells, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
            if (!vals.empty()) targets.push_back(std::move(vals));
        }
        if (targets.empty()) return "0";
        std::vector<double> mean(targets[0].size(), 0.0);
        for (const auto& t : targets)
            for (std::size_t j = 0; j < mean.size() && j < t.size(); ++j) mean[j] += t[j];
        std::string out;
        for (std::size_t j = 0; j < mean.size(); ++j) {
            if (j > 0) out += ", ";
            out += format_value(mean[j] / static_cast<double>(targets.size()));
        }
        return out;
    }

    // CoT: a fixed description template filled with parse-derived facts
    MoleculeGraph g = parse_smiles(bundle.smiles);
    std::size_t aromatic = 0, rings = 0;
    for (const auto& a : g.atoms)
        if (a.aromatic) ++aromatic;
    for (const auto& b : g.bonds)
        if (b.in_ring) ++rings;
    std::ostringstream out;
    out << "The molecule " << bundle.smiles << " contains " << g.num_atoms()
        << " heavy atoms and " << g.num_bonds() << " bonds";
    if (aromatic > 0) out << ", including " << aromatic << " aromatic atoms";
    if (rings > 0) out << " with " << rings << " ring bonds";
    out << ". ";
    out << "Element counts:";
    std::size_t counts[kElementCount] = {};
    for (const auto& a : g.atoms) counts[static_cast<std::size_t>(a.element)] += 1;
    for (std::size_t e = 0; e < kElementCount; ++e)
        if (counts[e] > 0)
            out << " " << element_symbol(static_cast<Element>(e)) << "=" << counts[e];
    out << ".";
    return out.str();
}

}  // namespace

CompletionResult complete(PromptBundle& bundle, const ProviderConfig& cfg,
                          const std::filesystem::path& cache_dir) {
    bundle.cache_key = compute_cache_key(cfg, bundle.text);
    std::filesystem::path file = cache_dir / (bundle.cache_key + ".txt");

    if (std::filesystem::exists(file)) {
        std::ifstream in(file, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return {buf.str(), true};
    }

    std::string response =
        cfg.provider == Provider::Mock ? mock_response(bundle) : http_post(bundle, cfg);

    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    // write-once: temp file then atomic rename, safe under concurrent writers
    std::filesystem::path tmp = file;
    tmp += ".tmp" + std::to_string(static_cast<unsigned long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw LlmError(LlmError::Kind::CacheWriteFailure,
                                 "cannot open cache file " + tmp.string());
        out << response;
        if (!out.good())
            throw LlmError(LlmError::Kind::CacheWriteFailure,
                           "short write to cache file " + tmp.string());
    }
    std::filesystem::rename(tmp, file, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        if (!std::filesystem::exists(file))
            throw LlmError(LlmError::Kind::CacheWriteFailure,
                           "cannot publish cache file " + file.string());
    }
    return {response, false};
}

std::vector<double> parse_predictions(const std::string& text, std::size_t c) {
    if (c < 1) throw std::invalid_argument("parse_predictions: c must be >= 1");

    // primary: leading JSON-style array
    std::size_t start = text.find_first_not_of(" \t\r\n");
    if (start != std::string::npos && text[start] == '[') {
        std::size_t end = text.find(']', start);
        if (end != std::string::npos) {
            std::vector<double> vals;
            std::istringstream cells(text.substr(start + 1, end - start - 1));
            std::string cell;
            bool ok = true;
            while (std::getline(cells, cell, ',')) {
                char* last = nullptr;
                double v = std::strtod(cell.c_str(), &last);
                while (last && *last && std::isspace(static_cast<unsigned char>(*last))) ++last;
                if (last == cell.c_str() || (last && *last)) {
                    ok = false;
                    break;
                }
                vals.push_back(v);
            }
            if (ok && vals.size() == c) return vals;
        }
    }

    // fallback: first c decimal tokens in reading order
    static const std::regex number(R"([-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)");
    std::vector<double> vals;
    auto begin = std::sregex_iterator(text.begin(), text.end(), number);
    for (auto it = begin; it != std::sregex_iterator() && vals.size() < c; ++it)
        vals.push_back(std::strtod(it->str().c_str(), nullptr));
    if (vals.size() < c)
        throw LlmError(LlmError::Kind::TooFewNumbers,
                       "found " + std::to_string(vals.size()) + " numbers, needed " +
                           std::to_string(c));
    return vals;
}

PredictionEmbeddingParams::PredictionEmbeddingParams(std::size_t d, std::size_t targets,
                                                     std::mt19937_64& rng)
    : w("llm.w_icl", glorot_uniform(d, targets, rng)), b("llm.b_icl", Matrix(1, d)) {}

Tape::Var encode_prediction(Tape& tape, const std::vector<double>& h_pred,
                            PredictionEmbeddingParams& params) {
    if (h_pred.size() != params.w.cols())
        throw std::invalid_argument("encode_prediction: prediction width mismatch");
    auto pred = tape.constant(Matrix::row_vector(h_pred));  // 1 x c
    return tape.add(tape.matmul(pred, tape.transpose(tape.param(params.w))),
                    tape.param(params.b));
}

}  // namespace mmf
