#pragma once

#include <filesystem>
#include <stdexcept>

#include "mmf/model.hpp"

namespace mmf {

class ArchiveMismatch : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned line-oriented text archive: header, model configuration,
// standardizer statistics, vocabulary, then one shape-tagged record per
// parameter (full 17-significant-digit values) and a trailing checksum.
// Parameters removed by an ablation never appear in the manifest.
void save_model(MmfModel& model, const std::filesystem::path& path);
MmfModel load_model(const std::filesystem::path& path);

}  // namespace mmf
