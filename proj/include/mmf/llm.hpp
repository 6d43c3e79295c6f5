#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mmf/chem.hpp"
#include "mmf/tape.hpp"

namespace mmf {

enum class Provider { Mock, Http };

struct ProviderConfig {
    Provider provider = Provider::Mock;
    std::string endpoint;     // http provider only
    std::string model = "mock";
    std::string api_key_env;  // name of the env var holding the key
    double top_p = 1.0;
    double temperature = 0.0;
    int max_response_tokens = 1024;
    int timeout_ms = 30000;
    int retries = 2;
    // ICL prompts longer than this drop their least-similar demos.
    std::size_t prompt_char_budget = 16384;
};

enum class PromptKind { Cot, Icl };

struct PromptBundle {
    PromptKind kind = PromptKind::Cot;
    std::string text;
    std::string smiles;          // query molecule
    std::size_t demo_count = 0;
    std::size_t dropped_demos = 0;  // removed by the length guard
    std::string cache_key;          // filled by complete()
};

class LlmError : public std::runtime_error {
public:
    enum class Kind { NetworkFailure, AuthMissing, CacheWriteFailure, TooFewNumbers };

    LlmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// The 14 chain-of-thought prompts, in order, with the SMILES substituted
// into the first one.
std::vector<std::string> build_cot_prompts(const std::string& smiles);

extern const char* const kIclInstruction;

// Instruction line, one "SMILES -> v1,v2,..." line per demo (6 significant
// digits), then "QUERY: <smiles> ->". Deterministic byte-for-byte.
PromptBundle build_icl_prompt(const std::string& query_smiles,
                              const std::vector<Demo>& demos,
                              const std::string& instruction = kIclInstruction,
                              std::size_t char_budget = 16384);

PromptBundle make_cot_bundle(const std::string& smiles, const std::string& prompt_text);

std::string compute_cache_key(const ProviderConfig& cfg, const std::string& prompt_text);

struct CompletionResult {
    std::string text;
    bool cache_hit = false;
};

// Cache-aware completion. Mock provider is pure and never touches the
// network; http provider POSTs the prompt and treats the body as opaque text.
CompletionResult complete(PromptBundle& bundle, const ProviderConfig& cfg,
                          const std::filesystem::path& cache_dir);

// Leading JSON-style array of c reals, falling back to the first c decimal
// tokens in reading order. Throws LlmError::TooFewNumbers otherwise.
std::vector<double> parse_predictions(const std::string& text, std::size_t c);

// 6-significant-digit demo value formatting shared by prompts and the mock.
std::string format_value(double v);

struct PredictionEmbeddingParams {
    ParamTensor w;  // d x c
    ParamTensor b;  // 1 x d

    PredictionEmbeddingParams() = default;
    PredictionEmbeddingParams(std::size_t d, std::size_t targets, std::mt19937_64& rng);

    std::vector<ParamTensor*> params() { return {&w, &b}; }
};

// h_ICL = W_icl h_pred + bias, as a 1 x d tape value.
Tape::Var encode_prediction(Tape& tape, const std::vector<double>& h_pred,
                            PredictionEmbeddingParams& params);

}  // namespace mmf
