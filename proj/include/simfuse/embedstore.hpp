// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/** \file embedstore.hpp
 *  \brief EMBF binary embedding container, its ID sidecar, and L2 normalization.
 *
 * Layout (all integers little-endian):
 *
 *   offset  size  field
 *        0     4  magic "EMBF"
 *        4     4  version (u32) = 1
 *        8     8  rows (u64)
 *       16     4  dim (u32)
 *       20     1  dtype (u8) = 1, f32-LE
 *       21     3  zero padding
 *       24     -  rows * dim f32-LE values, row-major
 *
 * The sidecar at `path + ".ids"` holds one ID per line, joined by '\n'.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simfuse {

inline constexpr std::size_t kEmbfHeaderSize = 24;
inline constexpr std::uint32_t kEmbfVersion = 1;
inline constexpr std::uint8_t kEmbfDtypeF32 = 1;
inline constexpr double kUnitNormTolerance = 1e-5;

/// Dense row-major float32 matrix. Immutable after construction.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() : EmbeddingMatrix(0, 1, {}) {}

    /// Throws Error if values.size() != rows * dim, dim == 0, or any value
    /// is non-finite. The normalized flag is derived from the data.
    EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    bool normalized() const noexcept { return normalized_; }

    std::span<const float> values() const noexcept { return values_; }
    std::span<const float> row(std::size_t i) const noexcept {
        return {values_.data() + i * dim_, dim_};
    }

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t dim_;
    std::vector<float> values_;
    bool normalized_;
};

/// External string IDs, one per matrix row.
class IdTable {
public:
    IdTable() = default;
    /// Throws Error on empty, duplicate, or tab/newline-containing IDs.
    explicit IdTable(std::vector<std::string> ids);

    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    const std::string& operator[](std::size_t i) const { return ids_[i]; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    std::optional<std::size_t> find(std::string_view id) const;

    friend bool operator==(const IdTable& a, const IdTable& b) { return a.ids_ == b.ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct EmbfContents {
    EmbeddingMatrix matrix;
    IdTable ids;
};

/// Serialized EMBF bytes (header + payload) for a matrix.
std::vector<std::byte> encode_embf(const EmbeddingMatrix& matrix);

/// Parse EMBF bytes. Every length is checked against the buffer size before
/// anything is allocated.
EmbeddingMatrix decode_embf(std::span<const std::byte> bytes);

std::string encode_id_sidecar(const IdTable& ids);
IdTable decode_id_sidecar(std::string_view text);

std::filesystem::path sidecar_path(const std::filesystem::path& embf_path);

void write_embf(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                const IdTable& ids);
EmbfContents read_embf(const std::filesystem::path& path);

/// Reads only the sidecar of an EMBF file.
IdTable read_id_sidecar(const std::filesystem::path& embf_path);

/// Divides every row by its L2 norm. Throws Error naming the first row whose
/// norm is below 1e-12.
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& matrix);

}  // namespace simfuse
