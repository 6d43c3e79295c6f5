#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "mmf/tape.hpp"

namespace mmf {

// Deterministic word-level vocabulary: tokens ordered by descending corpus
// frequency, ties lexicographic; id 0 is reserved for unknown tokens.
class Vocabulary {
public:
    static Vocabulary build(const std::vector<std::string>& corpus,
                            std::size_t max_tokens_per_doc = 512);

    std::size_t size() const { return tokens_.size() + 1; }  // +1 for <unk>
    std::size_t max_tokens() const { return max_tokens_; }
    int id_of(const std::string& token) const;
    const std::vector<std::string>& tokens() const { return tokens_; }

    // Serialization hooks for the model archive.
    static Vocabulary from_tokens(std::vector<std::string> tokens,
                                  std::size_t max_tokens_per_doc);

private:
    std::vector<std::string> tokens_;            // index i -> id i+1
    std::map<std::string, int> ids_;
    std::size_t max_tokens_ = 512;
};

// Lowercase, split on whitespace and punctuation boundaries (each punctuation
// character is its own token), truncate to the vocabulary's document cap.
std::vector<std::string> split_tokens(const std::string& text);
std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab);

// Trainable stand-in for the fine-tuned small LM: token embedding table plus
// learned positions, pooled by the softmax attention of Eqs. 4-5.
struct TextEncoderParams {
    ParamTensor embedding;   // vocab x d
    ParamTensor positional;  // max_tokens x d
    ParamTensor pool_u;      // 1 x d attention vector, zero-initialized

    TextEncoderParams() = default;
    TextEncoderParams(std::size_t vocab_size, std::size_t max_tokens, std::size_t d,
                      std::mt19937_64& rng);

    std::vector<ParamTensor*> params() { return {&embedding, &positional, &pool_u}; }
};

// ids -> m x d contextual token matrix (embedding row + positional row).
Tape::Var encode_tokens(Tape& tape, const std::vector<int>& ids,
                        TextEncoderParams& params);

// Softmax attention pooling: alpha = softmax(u . h_i), h_text = sum alpha_i h_i.
Tape::Var attention_pool(Tape& tape, Tape::Var token_matrix, ParamTensor& pool_u);

// Full document path: tokenize -> encode -> pool -> 1 x d.
Tape::Var encode_document(Tape& tape, const std::string& text, const Vocabulary& vocab,
                          TextEncoderParams& params);

}  // namespace mmf
