#pragma once

#include <filesystem>

#include "spcp/matcore.hpp"

namespace spcp {

/// Binary layout: 8-byte magic "SPCPMAT1", u64 rows, u64 cols, then rows*cols
/// little-endian f64 values in row-major order.
void write_matrix_binary(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_binary(const std::filesystem::path& path);

/// One matrix row per line, comma separated.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Dispatches on the magic bytes: binary if the file starts with "SPCPMAT1", CSV otherwise.
Matrix read_matrix(const std::filesystem::path& path);

}  // namespace spcp
