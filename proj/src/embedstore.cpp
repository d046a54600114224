// Copyright (C) 2026 The simfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "simfuse/embedstore.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "simfuse/error.hpp"

namespace simfuse {

namespace {

constexpr std::byte kMagic[4] = {std::byte{'E'}, std::byte{'M'}, std::byte{'B'}, std::byte{'F'}};

void put_le(std::vector<std::byte>& out, std::uint64_t value, int width) {
    for (int i = 0; i < width; ++i) {
        out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFFu));
    }
}

std::uint64_t get_le(std::span<const std::byte> bytes, std::size_t offset, int width) {
    std::uint64_t value = 0;
    for (int i = 0; i < width; ++i) {
        value |= std::to_integer<std::uint64_t>(bytes[offset + i]) << (8 * i);
    }
    return value;
}

bool row_is_unit(std::span<const float> row) {
    double sq = 0.0;
    for (float v : row) sq += static_cast<double>(v) * v;
    return std::abs(std::sqrt(sq) - 1.0) <= kUnitNormTolerance;
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(size);
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
        throw Error(ErrorCode::io, "read failed for " + path.string());
    }
    return bytes;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> values)
    : rows_(rows), dim_(dim), values_(std::move(values)), normalized_(true) {
    if (dim_ == 0) throw Error(ErrorCode::invariant, "dim must be >= 1");
    if (rows_ > values_.max_size() / dim_ || values_.size() != rows_ * dim_) {
        throw Error(ErrorCode::invariant, "values length " + std::to_string(values_.size()) +
                                              " != rows*dim");
    }
    for (float v : values_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::invariant, "non-finite value");
    }
    for (std::size_t r = 0; r < rows_ && normalized_; ++r) {
        normalized_ = row_is_unit(row(r));
    }
}

IdTable::IdTable(std::vector<std::string> ids) : ids_(std::move(ids)) {
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        const std::string& id = ids_[i];
        if (id.empty()) throw Error(ErrorCode::invariant, "empty id at row " + std::to_string(i));
        if (id.find_first_of("\t\n\r") != std::string::npos) {
            throw Error(ErrorCode::invariant, "id at row " + std::to_string(i) +
                                                  " contains tab or newline");
        }
        if (!index_.emplace(id, i).second) {
            throw Error(ErrorCode::invariant, "duplicate id '" + id + "'");
        }
    }
}

std::optional<std::size_t> IdTable::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::byte> encode_embf(const EmbeddingMatrix& matrix) {
    std::vector<std::byte> out;
    out.reserve(kEmbfHeaderSize + matrix.values().size() * sizeof(float));
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_le(out, kEmbfVersion, 4);
    put_le(out, matrix.rows(), 8);
    put_le(out, matrix.dim(), 4);
    put_le(out, kEmbfDtypeF32, 1);
    put_le(out, 0, 3);
    for (float v : matrix.values()) put_le(out, std::bit_cast<std::uint32_t>(v), 4);
    return out;
}

EmbeddingMatrix decode_embf(std::span<const std::byte> bytes) {
    if (bytes.size() < kEmbfHeaderSize) throw Error(ErrorCode::format, "truncated header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(ErrorCode::format, "bad magic");
    const auto version = get_le(bytes, 4, 4);
    if (version != kEmbfVersion) {
        throw Error(ErrorCode::format, "version mismatch: " + std::to_string(version));
    }
    const std::uint64_t rows = get_le(bytes, 8, 8);
    const std::uint64_t dim = get_le(bytes, 16, 4);
    if (get_le(bytes, 20, 1) != kEmbfDtypeF32) throw Error(ErrorCode::format, "unsupported dtype");
    if (get_le(bytes, 21, 3) != 0) throw Error(ErrorCode::format, "nonzero header padding");
    if (dim == 0) throw Error(ErrorCode::format, "dim must be >= 1");

    const std::uint64_t available = bytes.size() - kEmbfHeaderSize;
    const std::uint64_t max_values = available / sizeof(float);
    if (rows > max_values / dim || rows * dim * sizeof(float) > available) {
        // Overflow-safe: report the expected size only when it is representable.
        std::string expected = rows <= std::numeric_limits<std::uint64_t>::max() / dim / 4
                                   ? std::to_string(rows * dim * 4)
                                   : std::string("overflow");
        throw Error(ErrorCode::format, "truncated payload (" + std::to_string(available) +
                                           " bytes, " + expected + " expected)");
    }
    const std::uint64_t payload = rows * dim * sizeof(float);
    if (payload != available) {
        throw Error(ErrorCode::format, "trailing bytes after payload (" +
                                           std::to_string(available - payload) + ")");
    }

    std::vector<float> values(rows * dim);
    const std::byte* src = bytes.data() + kEmbfHeaderSize;
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(values.data(), src, payload);
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(
                get_le(bytes, kEmbfHeaderSize + 4 * i, 4)));
        }
    }
    return EmbeddingMatrix(rows, dim, std::move(values));
}

std::string encode_id_sidecar(const IdTable& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += ids[i];
    }
    return out;
}

IdTable decode_id_sidecar(std::string_view text) {
    std::vector<std::string> ids;
    if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
    if (!text.empty()) {
        std::size_t start = 0;
        while (true) {
            const auto end = text.find('\n', start);
            ids.emplace_back(text.substr(start, end == std::string_view::npos ? end : end - start));
            if (end == std::string_view::npos) break;
            start = end + 1;
        }
    }
    return IdTable(std::move(ids));
}

std::filesystem::path sidecar_path(const std::filesystem::path& embf_path) {
    auto p = embf_path;
    p += ".ids";
    return p;
}

void write_embf(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                const IdTable& ids) {
    if (ids.size() != matrix.rows()) {
        throw Error(ErrorCode::invariant, "id count " + std::to_string(ids.size()) +
                                              " != rows " + std::to_string(matrix.rows()));
    }
    const auto bytes = encode_embf(matrix);
    const auto sidecar = encode_id_sidecar(ids);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());

    std::ofstream side(sidecar_path(path), std::ios::binary | std::ios::trunc);
    side << sidecar;
    if (!side) throw Error(ErrorCode::io, "write failed for " + sidecar_path(path).string());
}

IdTable read_id_sidecar(const std::filesystem::path& embf_path) {
    const auto raw = read_file(sidecar_path(embf_path));
    return decode_id_sidecar(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
}

EmbfContents read_embf(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    EmbeddingMatrix matrix = decode_embf(bytes);
    IdTable ids = read_id_sidecar(path);
    if (ids.size() != matrix.rows()) {
        throw Error(ErrorCode::mismatch, "sidecar has " + std::to_string(ids.size()) +
                                             " ids but matrix has " +
                                             std::to_string(matrix.rows()) + " rows");
    }
    return {std::move(matrix), std::move(ids)};
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& matrix) {
    std::vector<float> out(matrix.values().begin(), matrix.values().end());
    const std::size_t dim = matrix.dim();
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        double sq = 0.0;
        for (float v : matrix.row(r)) sq += static_cast<double>(v) * v;
        const double norm = std::sqrt(sq);
        if (norm < 1e-12) throw Error(ErrorCode::invariant, "zero-norm row " + std::to_string(r));
        for (std::size_t c = 0; c < dim; ++c) {
            out[r * dim + c] = static_cast<float>(out[r * dim + c] / norm);
        }
    }
    return EmbeddingMatrix(matrix.rows(), dim, std::move(out));
}

}  // namespace simfuse
