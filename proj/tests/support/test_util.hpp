// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "simfuse/embedstore.hpp"

namespace simfuse::testing {

/// Removes itself on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("simfuse_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
    std::normal_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> v(rows * dim);
    for (auto& x : v) x = dist(rng);
    return EmbeddingMatrix(rows, dim, std::move(v));
}

inline EmbeddingMatrix random_unit_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
    return l2_normalize(random_matrix(rng, rows, dim));
}

inline IdTable numbered_ids(const std::string& prefix, std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
    return IdTable(std::move(ids));
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

}  // namespace simfuse::testing
