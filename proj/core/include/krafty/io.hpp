#pragma once

#include "krafty/clustering.hpp"
#include "krafty/selectk.hpp"
#include "krafty/types.hpp"

#include <filesystem>
#include <string>

namespace krafty::io {

/// Shortest exact decimal representation (round-trips to the same double).
std::string format_double(double v);

/// Header-free dense matrix CSV: one row per line, comma-separated floats.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// One zero-based integer label per line.
Assignment read_assignment_csv(const std::filesystem::path& path);
void write_assignment_csv(const std::filesystem::path& path, const Assignment& a);

/// `index,value,gap` rows (header written; tolerated but not required when
/// reading).
Spectrum read_spectrum_csv(const std::filesystem::path& path);
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s);

/// `step,left,right,merged,height` rows plus header.
Dendrogram read_dendrogram_csv(const std::filesystem::path& path);
void write_dendrogram_csv(const std::filesystem::path& path, const Dendrogram& d);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string file_digest(const std::filesystem::path& path);

}  // namespace krafty::io
