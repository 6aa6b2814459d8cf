#include "rd/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rd {

void MatrixBundle::add(std::string name, DenseMatrix m) {
  if (find(name) != nullptr)
    fail(ErrorCode::DuplicateName, "bundle: duplicate entry '" + name + "'");
  entries.emplace_back(std::move(name), std::move(m));
}

const DenseMatrix* MatrixBundle::find(std::string_view name) const {
  for (const auto& [n, m] : entries)
    if (n == name) return &m;
  return nullptr;
}

namespace {

constexpr char kMagic[4] = {'R', 'D', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32le(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = char((v >> (8 * i)) & 0xFF);
  os.write(b, 4);
}

void put_u64le(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}

void put_f64le(std::ostream& os, double v) {
  put_u64le(os, std::bit_cast<std::uint64_t>(v));
}

void need(std::istream& is, char* buf, std::size_t len, const char* what) {
  is.read(buf, std::streamsize(len));
  if (std::size_t(is.gcount()) != len)
    fail(ErrorCode::TruncatedFile,
         std::string("bundle: file ends inside ") + what);
}

std::uint32_t get_u32le(std::istream& is, const char* what) {
  char b[4];
  need(is, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= std::uint32_t(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

std::uint64_t get_u64le(std::istream& is, const char* what) {
  char b[8];
  need(is, b, 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= std::uint64_t(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

}  // namespace

void write_bundle(const std::filesystem::path& path, const MatrixBundle& b) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::IoFailure, "cannot open for write: " + path.string());
  os.write(kMagic, 4);
  put_u32le(os, kVersion);
  put_u32le(os, std::uint32_t(b.entries.size()));
  for (const auto& [name, m] : b.entries) {
    put_u32le(os, std::uint32_t(name.size()));
    os.write(name.data(), std::streamsize(name.size()));
    put_u64le(os, m.rows());
    put_u64le(os, m.cols());
    for (double v : m.data()) put_f64le(os, v);
  }
  if (!os) fail(ErrorCode::IoFailure, "write failed: " + path.string());
}

MatrixBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoFailure, "cannot open: " + path.string());
  char magic[4];
  need(is, magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorCode::BadMagic, "bundle: bad magic in " + path.string());
  const std::uint32_t version = get_u32le(is, "version");
  if (version != kVersion)
    fail(ErrorCode::VersionUnsupported,
         "bundle: version " + std::to_string(version) + " unsupported");
  const std::uint32_t count = get_u32le(is, "entry count");

  MatrixBundle b;
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint32_t name_len = get_u32le(is, "name length");
    std::string name(name_len, '\0');
    need(is, name.data(), name_len, "name");
    const std::uint64_t rows = get_u64le(is, "rows");
    const std::uint64_t cols = get_u64le(is, "cols");
    std::vector<double> data(rows * cols);
    for (double& v : data)
      v = std::bit_cast<double>(get_u64le(is, "matrix data"));
    b.add(std::move(name), DenseMatrix(rows, cols, std::move(data)));
  }
  return b;
}

IdxTensor read_idx(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoFailure, "cannot open: " + path.string());
  char header[4];
  need(is, header, 4, "idx magic");
  const auto b = [&](int i) { return static_cast<unsigned char>(header[i]); };
  if (b(0) != 0 || b(1) != 0 || b(2) != 0x08)
    fail(ErrorCode::BadMagic, "idx: bad magic in " + path.string());
  const unsigned ndims = b(3);
  if (ndims == 0) fail(ErrorCode::BadMagic, "idx: zero-dimensional tensor");

  IdxTensor t;
  t.dims.reserve(ndims);
  std::size_t total = 1;
  for (unsigned i = 0; i < ndims; ++i) {
    char raw[4];
    need(is, raw, 4, "idx dimension");
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
      v = (v << 8) | std::uint32_t(static_cast<unsigned char>(raw[k]));
    t.dims.push_back(v);
    total *= v;
  }
  t.data.resize(total);
  need(is, reinterpret_cast<char*>(t.data.data()), total, "idx payload");
  return t;
}

DenseMatrix IdxTensor::as_columns_normalized() const {
  if (dims.empty()) fail(ErrorCode::ShapeMismatch, "idx: empty tensor");
  const index_t n = dims[0];
  index_t d = 1;
  for (index_t i = 1; i < dims.size(); ++i) d *= dims[i];
  if (d == 0 || n == 0) fail(ErrorCode::ShapeMismatch, "idx: empty dimension");
  DenseMatrix m(d, n);
  for (index_t j = 0; j < n; ++j)
    for (index_t i = 0; i < d; ++i)
      m(i, j) = double(data[j * d + i]) / 255.0;
  return m;
}

namespace {

nlohmann::json layer_to_json(const RdLayerRow& row) {
  return nlohmann::json{
      {"layer", row.layer},         {"d_in", row.d_in},
      {"d_out", row.d_out},         {"scale_a", row.scale_a},
      {"r_eff", row.r_eff},         {"d_eff", row.d_eff},
      {"inner_term", row.inner_term}, {"outer_term", row.outer_term},
      {"log_term", row.log_term},   {"lambda_max", row.lambda_max},
      {"contribution", row.contribution}};
}

}  // namespace

std::string report_to_json(const RdReport& report) {
  nlohmann::json j;
  j["eps_star"] = report.eps_star;
  j["d_r_total"] = report.d_r_total;
  j["d_r_total_log_free"] = report.d_r_total_log_free;
  j["one_shot_bound"] = report.one_shot_bound;
  j["integral_bound"] = report.integral_bound;
  j["delta_term"] = report.delta_term;
  j["frobenius_norm"] = report.frobenius_norm;
  j["baselines"] = {{"param_count", report.baselines.param_count},
                    {"vc_proxy", report.baselines.vc_proxy},
                    {"spectral_bound", report.baselines.spectral_bound},
                    {"bartlett_bound", report.baselines.bartlett_bound}};
  j["per_layer"] = nlohmann::json::array();
  for (const RdLayerRow& row : report.per_layer)
    j["per_layer"].push_back(layer_to_json(row));
  return j.dump(2);
}

std::string report_to_csv(const RdReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "layer,d_in,d_out,r_eff,d_eff,scale_a,lambda_max\n";
  if (report.per_layer.empty()) return os.str();
  index_t r_total = 0;
  double d_total = 0.0;
  for (const RdLayerRow& row : report.per_layer) {
    os << row.layer << ',' << row.d_in << ',' << row.d_out << ',' << row.r_eff
       << ',' << row.d_eff << ',' << row.scale_a << ',' << row.lambda_max
       << '\n';
    r_total += row.r_eff;
    d_total += row.d_eff;
  }
  os << "Total,,," << r_total << ',' << d_total << ",,\n";
  return os.str();
}

void write_report(const std::filesystem::path& path, const RdReport& report,
                  ReportFormat format) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorCode::IoFailure, "cannot open for write: " + path.string());
  os << (format == ReportFormat::Json ? report_to_json(report)
                                      : report_to_csv(report));
  if (format == ReportFormat::Json) os << '\n';
  if (!os) fail(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace rd
