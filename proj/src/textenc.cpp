#include "mmf/textenc.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace mmf {

std::vector<std::string> split_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
            if (!std::isspace(c)) out.push_back(std::string(1, ch));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus,
                             std::size_t max_tokens_per_doc) {
    std::map<std::string, std::size_t> freq;
    for (const std::string& doc : corpus)
        for (const std::string& tok : split_tokens(doc)) freq[tok] += 1;

    std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::string> tokens;
    tokens.reserve(items.size());
    for (auto& [tok, count] : items) tokens.push_back(tok);
    return from_tokens(std::move(tokens), max_tokens_per_doc);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens,
                                   std::size_t max_tokens_per_doc) {
    Vocabulary v;
    v.tokens_ = std::move(tokens);
    v.max_tokens_ = max_tokens_per_doc;
    for (std::size_t i = 0; i < v.tokens_.size(); ++i)
        v.ids_[v.tokens_[i]] = static_cast<int>(i) + 1;
    return v;
}

int Vocabulary::id_of(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? 0 : it->second;
}

std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab) {
    std::vector<int> ids;
    for (const std::string& tok : split_tokens(text)) {
        if (ids.size() >= vocab.max_tokens()) break;
        ids.push_back(vocab.id_of(tok));
    }
    return ids;
}

TextEncoderParams::TextEncoderParams(std::size_t vocab_size, std::size_t max_tokens,
                                     std::size_t d, std::mt19937_64& rng)
    : embedding("textenc.embedding", glorot_uniform(vocab_size, d, rng)),
      positional("textenc.positional", glorot_uniform(max_tokens, d, rng)),
      pool_u("textenc.pool_u", Matrix(1, d)) {}

Tape::Var encode_tokens(Tape& tape, const std::vector<int>& ids,
                        TextEncoderParams& params) {
    if (ids.empty()) throw std::invalid_argument("encode_tokens: empty sequence");
    std::vector<int> positions(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);
    auto emb = tape.gather_rows(tape.param(params.embedding), ids);
    auto pos = tape.gather_rows(tape.param(params.positional), positions);
    return tape.add(emb, pos);
}

Tape::Var attention_pool(Tape& tape, Tape::Var token_matrix, ParamTensor& pool_u) {
    if (tape.value(token_matrix).rows() == 0)
        throw std::invalid_argument("attention_pool: empty sequence");
    auto u = tape.param(pool_u);                                      // 1 x d
    auto logits = tape.transpose(tape.matmul(token_matrix, tape.transpose(u)));  // 1 x m
    auto weights = tape.softmax_rows(logits);
    return tape.matmul(weights, token_matrix);  // 1 x d
}

Tape::Var encode_document(Tape& tape, const std::string& text, const Vocabulary& vocab,
                          TextEncoderParams& params) {
    std::vector<int> ids = tokenize(text, vocab);
    if (ids.empty()) ids.push_back(0);  // empty document degrades to <unk>
    auto tokens = encode_tokens(tape, ids, params);
    return attention_pool(tape, tokens, params.pool_u);
}

}  // namespace mmf
