#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rd/bounds.hpp"
#include "rd/linalg.hpp"

namespace rd {

/// Ordered named-matrix container backing the RDMB file format.
///
/// On disk (little-endian throughout): magic "RDMB", u32 version = 1,
/// u32 entry count; per entry u32 name byte-length, name bytes, u64 rows,
/// u64 cols, rows*cols float64 row-major.
struct MatrixBundle {
  std::vector<std::pair<std::string, DenseMatrix>> entries;

  void add(std::string name, DenseMatrix m);  // throws DuplicateName
  const DenseMatrix* find(std::string_view name) const;
};

void write_bundle(const std::filesystem::path& path, const MatrixBundle& b);
MatrixBundle read_bundle(const std::filesystem::path& path);

/// IDX tensor (big-endian header, u8 payload): magic 0x0000'08'NN where NN is
/// the dimension count, one u32 size per dimension, then the raw bytes.
struct IdxTensor {
  std::vector<index_t> dims;
  std::vector<std::uint8_t> data;

  /// Flatten trailing dims and normalize to [0, 1]: one column per leading
  /// index, e.g. 60000 x 28 x 28 becomes 784 x 60000.
  DenseMatrix as_columns_normalized() const;
};

IdxTensor read_idx(const std::filesystem::path& path);

enum class ReportFormat { Json, Csv };

std::string report_to_json(const RdReport& report);
/// One row per layer (layer, d_in, d_out, r_eff, d_eff, scale_a, lambda_max)
/// plus a Total row when any layers exist.
std::string report_to_csv(const RdReport& report);

void write_report(const std::filesystem::path& path, const RdReport& report,
                  ReportFormat format);

}  // namespace rd
