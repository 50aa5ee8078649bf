#ifndef MINOUT_IO_HPP
#define MINOUT_IO_HPP

// JSON and CSV serialization. Matrix payloads keep full double precision so
// that channels and certificates round-trip bit-exactly; reported scalars
// are rounded to 12 significant digits.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "minout/certify.hpp"
#include "minout/channels.hpp"
#include "minout/entropy.hpp"
#include "minout/qmath.hpp"

namespace minout::io {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

class FormatError : public Error {
 public:
  using Error::Error;
};

/// "%.12g" formatting.
inline std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// x rounded to 12 significant digits, for JSON report fields.
inline double round12(double x) { return std::isfinite(x) ? std::stod(fmt12(x)) : x; }

inline json complex_entry(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx parse_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError("complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

/// Row-major list of [re, im] pairs.
inline json matrix_entries(const ComplexMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(complex_entry(m(i, j)));
  return out;
}

inline ComplexMatrix parse_matrix_entries(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols)
    throw FormatError("expected " + std::to_string(rows * cols) + " matrix entries");
  ComplexMatrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = parse_complex(j[k++]);
  return m;
}

inline json vector_entries(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_entry(v(i)));
  return out;
}

inline BipartiteShape parse_shape(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw FormatError("shape must be [d_A, d_B]");
  return BipartiteShape(j[0].get<int>(), j[1].get<int>());
}

inline json shape_json(const BipartiteShape& s) { return json::array({s.d_a(), s.d_b()}); }

// ---------------------------------------------------------------------------
// Channels

struct ChannelDocument {
  Channel channel;
  std::string label;
  std::optional<std::uint64_t> seed;
};

inline json channel_to_json(const Channel& ch, const std::string& label = "",
                            std::optional<std::uint64_t> seed = std::nullopt) {
  json j;
  j["kind"] = "channel";
  j["shape"] = shape_json(ch.shape());
  j["label"] = label;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["cj"] = matrix_entries(ch.cj().matrix());
  return j;
}

inline ChannelDocument channel_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("cj")) throw FormatError("channel document needs shape and cj");
  const BipartiteShape shape = parse_shape(j.at("shape"));
  const ComplexMatrix cj = parse_matrix_entries(j.at("cj"), shape.total(), shape.total());
  ChannelDocument doc{Channel(SpectralState(cj), shape), j.value("label", std::string{}), std::nullopt};
  if (j.contains("seed") && !j.at("seed").is_null()) doc.seed = j.at("seed").get<std::uint64_t>();
  return doc;
}

// ---------------------------------------------------------------------------
// Subspaces

/// Basis vectors as read from disk, before any orthonormality validation.
struct RawBasis {
  BipartiteShape shape;
  ComplexMatrix vectors;  // one column per vector
  std::string label;
};

inline json subspace_to_json(const Subspace& s, const std::string& label = "",
                             std::optional<std::uint64_t> seed = std::nullopt) {
  json j;
  j["kind"] = "subspace";
  j["shape"] = shape_json(s.shape());
  j["label"] = label;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  json basis = json::array();
  for (int i = 0; i < s.dim(); ++i) basis.push_back(vector_entries(s.vector(i)));
  j["basis"] = std::move(basis);
  return j;
}

inline RawBasis raw_basis_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("basis"))
    throw FormatError("subspace document needs shape and basis");
  const BipartiteShape shape = parse_shape(j.at("shape"));
  const json& b = j.at("basis");
  if (!b.is_array() || b.empty()) throw FormatError("basis must be a non-empty list of vectors");
  ComplexMatrix v(shape.total(), static_cast<Eigen::Index>(b.size()));
  for (std::size_t k = 0; k < b.size(); ++k)
    v.col(static_cast<Eigen::Index>(k)) = parse_matrix_entries(b[k], shape.total(), 1);
  return {shape, std::move(v), j.value("label", std::string{})};
}

/// Validating load; throws when the basis is not orthonormal.
inline Subspace subspace_from_json(const json& j) {
  RawBasis raw = raw_basis_from_json(j);
  return Subspace(raw.shape, std::move(raw.vectors));
}

// ---------------------------------------------------------------------------
// Certificates

inline json certificate_to_json(const SdpCertificate& c, const ComplexMatrix& omega, const BipartiteShape& shape) {
  json j;
  j["kind"] = "ppt_certificate";
  j["shape"] = shape_json(shape);
  j["lambda"] = c.lambda;
  j["primal_value"] = c.primal_value;
  j["relative_gap"] = c.relative_gap;
  j["iterations"] = c.iterations;
  j["converged"] = c.converged;
  j["residual"] = c.residual;
  j["min_eig_x"] = c.min_eig_x;
  j["min_eig_y"] = c.min_eig_y;
  j["omega"] = matrix_entries(omega);
  j["x"] = matrix_entries(c.x);
  j["y"] = matrix_entries(c.y);
  return j;
}

struct CertificateDocument {
  BipartiteShape shape;
  ComplexMatrix omega;
  SdpCertificate certificate;
};

inline CertificateDocument certificate_from_json(const json& j) {
  if (!j.is_object() || j.value("kind", std::string{}) != "ppt_certificate")
    throw FormatError("not a ppt_certificate document");
  const BipartiteShape shape = parse_shape(j.at("shape"));
  const Eigen::Index n = shape.total();
  CertificateDocument d{shape, parse_matrix_entries(j.at("omega"), n, n), {}};
  SdpCertificate& c = d.certificate;
  c.lambda = c.dual_value = j.at("lambda").get<double>();
  c.primal_value = j.value("primal_value", 0.0);
  c.relative_gap = j.value("relative_gap", 1.0);
  c.iterations = j.value("iterations", 0);
  c.converged = j.value("converged", false);
  c.residual = j.value("residual", 0.0);
  c.min_eig_x = j.value("min_eig_x", 0.0);
  c.min_eig_y = j.value("min_eig_y", 0.0);
  c.x = parse_matrix_entries(j.at("x"), n, n);
  c.y = parse_matrix_entries(j.at("y"), n, n);
  return d;
}

// ---------------------------------------------------------------------------
// Scans

inline void write_scan_csv(std::ostream& os, const ViolationScan& s) {
  os << "p,red_bits,blue_bits,violated\n";
  for (std::size_t i = 0; i < s.p_grid.size(); ++i)
    os << fmt12(s.p_grid[i]) << ',' << fmt12(s.red[i]) << ',' << fmt12(s.blue[i]) << ',' << s.violated[i] << '\n';
}

inline json scan_sidecar(const ViolationScan& s) {
  json j;
  j["kind"] = "violation_scan";
  j["tool_version"] = kToolVersion;
  j["seed"] = s.seed;
  j["restarts"] = s.restarts;
  j["cj_variant"] = s.cj_variant;
  j["red_variant"] = to_string(s.red_variant);
  j["log_base"] = s.base == LogBase::bits ? "bits" : "nats";
  j["points"] = s.p_grid.size();
  j["p_start"] = round12(s.p_grid.front());
  j["p_stop"] = round12(s.p_grid.back());
  j["crossing"] = s.crossing ? json(round12(*s.crossing)) : json(nullptr);
  int nv = 0;
  for (int v : s.violated) nv += v;
  j["violated_points"] = nv;
  return j;
}

// ---------------------------------------------------------------------------
// Files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace minout::io

#endif  // MINOUT_IO_HPP
