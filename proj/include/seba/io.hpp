// Flat-file formats: CSV for spectra and heat sums, JSON for reports.
//
//   # seba-norms v1 dim=<d> coeffs=<...> cutoff=<X> merge_tol=<t>
//   n,r rows, n ascending
//   # seba-perturbed v1 phi=<phi> tol=<t> xmax=<X>
//   j,lambda,residual,d rows, j ascending
//
// Every real is printed with 17 significant digits so files round-trip.
#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seba/error.hpp"
#include "seba/lattice.hpp"
#include "seba/secular.hpp"
#include "seba/stats.hpp"
#include "seba/trace.hpp"

namespace seba {

inline constexpr const char* kToolkitVersion = "1.0.0";
inline constexpr int kNormsSchema = 1;
inline constexpr int kPerturbedSchema = 1;
inline constexpr int kReportSchema = 1;

using json = nlohmann::ordered_json;

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Writes to a sibling temporary file and renames it over the target.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(fnv1a64(path.string()) & 0xffffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

namespace detail {

inline double parse_real(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw SchemaError("bad number '" + std::string(s) + "' in " + what);
  return v;
}

inline std::int64_t parse_int(std::string_view s, const std::string& what) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw SchemaError("bad integer '" + std::string(s) + "' in " + what);
  return v;
}

struct CsvHeader {
  std::map<std::string, std::string> fields;
  const std::string& at(const std::string& key, const std::string& source) const {
    const auto it = fields.find(key);
    if (it == fields.end()) throw SchemaError(source + ": header lacks " + key);
    return it->second;
  }
};

/// Splits text into lines and checks the "# <magic> v<version>" header.
inline CsvHeader parse_header(std::string_view text, const std::string& magic, int version,
                              const std::string& source, std::vector<std::string_view>& rows) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    pos = end + 1;
  }
  if (lines.empty()) throw SchemaError(source + ": empty file");
  std::istringstream hs{std::string(lines[0])};
  std::string hash, tag, ver;
  hs >> hash >> tag >> ver;
  if (hash != "#" || tag != magic) throw SchemaError(source + ": not a " + magic + " file");
  const std::string want = "v" + std::to_string(version);
  if (ver != want) throw SchemaError(source + ": unsupported schema version " + ver + " (expected " + want + ")");
  CsvHeader h;
  for (std::string kv; hs >> kv;) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw SchemaError(source + ": malformed header field " + kv);
    h.fields[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  rows.assign(lines.begin() + 1, lines.end());
  return h;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto c = line.find(',', pos);
    out.push_back(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

}  // namespace detail

inline std::string norms_csv(const NormSpectrum& spec) {
  std::string out = "# seba-norms v" + std::to_string(kNormsSchema) + " dim=" + std::to_string(spec.form().dim()) +
                    " coeffs=" + spec.form().to_string() + " cutoff=" + format_real(spec.cutoff()) +
                    " merge_tol=" + format_real(spec.merge_tol()) + "\n";
  for (std::size_t j = 0; j < spec.size(); ++j)
    out += format_real(spec.norm(j)) + "," + std::to_string(spec.mult(j)) + "\n";
  return out;
}

inline NormSpectrum parse_norms_csv(std::string_view text, const std::string& source = "norms file") {
  std::vector<std::string_view> rows;
  const auto h = detail::parse_header(text, "seba-norms", kNormsSchema, source, rows);
  const auto form = DiagonalForm::parse(h.at("coeffs", source));
  if (detail::parse_int(h.at("dim", source), source) != form.dim())
    throw SchemaError(source + ": dim does not match coeffs");
  const double cutoff = detail::parse_real(h.at("cutoff", source), source);
  const double merge_tol = detail::parse_real(h.at("merge_tol", source), source);
  std::vector<double> norms;
  std::vector<std::int64_t> mults;
  norms.reserve(rows.size());
  mults.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto cols = detail::split_commas(rows[i]);
    const std::string where = source + " row " + std::to_string(i + 1);
    if (cols.size() != 2) throw SchemaError(where + ": expected n,r");
    norms.push_back(detail::parse_real(cols[0], where));
    mults.push_back(detail::parse_int(cols[1], where));
    if (mults.back() <= 0) throw SchemaError(where + ": multiplicity must be positive");
    if (i > 0 && !(norms[i] > norms[i - 1])) throw SchemaError(where + ": norms must ascend");
    if (norms[i] > cutoff) throw SchemaError(where + ": norm beyond the declared cutoff");
  }
  if (norms.empty() || norms[0] != 0.0 || mults[0] != 1) throw SchemaError(source + ": first row must be 0,1");
  return NormSpectrum(form, cutoff, merge_tol, std::move(norms), std::move(mults), form.is_exact());
}

inline NormSpectrum read_norms_csv(const std::filesystem::path& path) {
  return parse_norms_csv(read_file(path), path.string());
}

inline std::string perturbed_csv(const PerturbedSpectrum& p) {
  std::string out = "# seba-perturbed v" + std::to_string(kPerturbedSchema) + " phi=" + format_real(p.phi) +
                    " tol=" + format_real(p.tol) + " xmax=" + format_real(p.x_max) + "\n";
  for (std::size_t j = 0; j < p.size(); ++j)
    out += std::to_string(j) + "," + format_real(p.lambdas[j]) + "," + format_real(p.residuals[j]) + "," +
           format_real(p.d[j]) + "\n";
  return out;
}

/// The rhs field is not stored; it is left NaN.
inline PerturbedSpectrum parse_perturbed_csv(std::string_view text, const std::string& source = "perturbed file") {
  std::vector<std::string_view> rows;
  const auto h = detail::parse_header(text, "seba-perturbed", kPerturbedSchema, source, rows);
  PerturbedSpectrum p;
  p.phi = detail::parse_real(h.at("phi", source), source);
  p.tol = detail::parse_real(h.at("tol", source), source);
  p.x_max = detail::parse_real(h.at("xmax", source), source);
  p.rhs = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto cols = detail::split_commas(rows[i]);
    const std::string where = source + " row " + std::to_string(i + 1);
    if (cols.size() != 4) throw SchemaError(where + ": expected j,lambda,residual,d");
    if (detail::parse_int(cols[0], where) != static_cast<std::int64_t>(i)) throw SchemaError(where + ": j out of order");
    p.lambdas.push_back(detail::parse_real(cols[1], where));
    p.residuals.push_back(detail::parse_real(cols[2], where));
    p.d.push_back(detail::parse_real(cols[3], where));
  }
  return p;
}

inline PerturbedSpectrum read_perturbed_csv(const std::filesystem::path& path) {
  return parse_perturbed_csv(read_file(path), path.string());
}

inline std::string heat_csv(const std::vector<HeatTracePoint>& pts) {
  std::string out = "beta,a_tilde,difference_form,discrepancy,scaled_2d,scaled_3d\n";
  for (const auto& p : pts)
    out += format_real(p.beta) + "," + format_real(p.A_tilde) + "," + format_real(p.difference_form) + "," +
           format_real(p.discrepancy) + "," + format_real(p.scaled_2d) + "," + format_real(p.scaled_3d) + "\n";
  return out;
}

inline json to_json(const Histogram& h) {
  return json{{"support", {h.lo, h.hi}}, {"edges", h.edges}, {"densities", h.densities}};
}

inline json to_json(const SpacingReport& r) {
  return json{{"x", r.x},
              {"N", r.N},
              {"mean_delta", r.mean_delta},
              {"mean_delta_weyl", r.mean_delta_weyl},
              {"mean_d", r.mean_d},
              {"ratio", r.ratio},
              {"mean_delta_phi", r.mean_delta_phi},
              {"ks_poisson", r.ks_poisson},
              {"ks_poisson_perturbed", r.ks_poisson_perturbed},
              {"ks_between", r.ks_between},
              {"histogram", {{"norms", to_json(r.norm_histogram)}, {"perturbed", to_json(r.perturbed_histogram)}}},
              {"normalized_spacings", {{"norms", r.norm_spacings}, {"perturbed", r.perturbed_spacings}}},
              {"A_of_x", {{"lambda", r.A_lambda}, {"A", r.A_of_x}}}};
}

inline json to_json(const TraceCheckReport& r) {
  return json{{"dim", r.dim},
              {"beta", r.beta},
              {"sigma", r.sigma},
              {"lhs", r.lhs},
              {"smooth", r.smooth},
              {"diffractive", r.diffractive},
              {"rhs", r.rhs},
              {"abs_error", r.abs_error},
              {"imag_residue", r.imag_residue},
              {"max_condition", r.max_condition},
              {"budget",
               {{"quad", r.budget.quad},
                {"trunc_m", r.budget.trunc_m},
                {"trunc_s", r.budget.trunc_s},
                {"spectral", r.budget.spectral},
                {"total", r.budget.total()}}}};
}

inline json to_json(const HeatTracePoint& p) {
  return json{{"beta", p.beta},
              {"a_tilde", p.A_tilde},
              {"difference_form", p.difference_form},
              {"discrepancy", p.discrepancy},
              {"scaled_2d", p.scaled_2d},
              {"scaled_3d", p.scaled_3d}};
}

inline json to_json(const GreedyResult& g) {
  return json{{"m", g.m}, {"n", g.n}, {"k", g.k}, {"s1", g.s1}, {"s2", g.s2}, {"final", g.final}};
}

/// Reports are pretty-printed with a trailing newline.
inline std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

}  // namespace seba
