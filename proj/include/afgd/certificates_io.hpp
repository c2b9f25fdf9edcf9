#pragma once

// Certificate documents (JSON):
//
//   {
//     "params": {"m": 2, "L": 8, "alpha": 0.1, "eta": 0.2, "c1": 0.5, "c2": 1},
//     "tol": 1e-6,
//     "certificates": [
//       {"case": "theorem2_nonneg", "rho_sq": 0.4, "h": 0.2, "p": [p11, p12, p21, p22]}
//     ]
//   }
//
// "p" is row-major; theorem1 certificates carry a single entry. Doubles are
// written in shortest round-trip form, so read(write(doc)) == doc bit for bit.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "afgd/certificates.hpp"
#include "afgd/error.hpp"
#include "afgd/smallmat.hpp"

namespace afgd {

struct CertificateDocument {
  ProblemParams params;
  double tol = kNsdTolerance;
  std::vector<Certificate> certificates;

  friend bool operator==(const CertificateDocument&, const CertificateDocument&) = default;
};

inline nlohmann::json to_json(const ProblemParams& p) {
  return {{"m", p.m}, {"L", p.L}, {"alpha", p.alpha},
          {"eta", p.eta}, {"c1", p.c1}, {"c2", p.c2}};
}

inline nlohmann::json to_json(const Certificate& c) {
  std::vector<double> p;
  for (std::size_t i = 0; i < c.p.dim(); ++i)
    for (std::size_t j = 0; j < c.p.dim(); ++j) p.push_back(c.p(i, j));
  return {{"case", to_string(c.case_tag)}, {"rho_sq", c.rho_sq}, {"h", c.h}, {"p", p}};
}

inline nlohmann::json to_json(const CertificateDocument& d) {
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : d.certificates) certs.push_back(to_json(c));
  return {{"params", to_json(d.params)}, {"tol", d.tol}, {"certificates", certs}};
}

inline std::string write_certificate_document(const CertificateDocument& d) {
  return to_json(d).dump(2) + "\n";
}

namespace detail {

inline double json_number(const nlohmann::json& obj, const char* key, const std::string& src) {
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError(src, 0, key, "missing");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(src, 0, key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(src, 0, key, "non-finite number");
  return d;
}

}  // namespace detail

inline CertificateDocument parse_certificate_document(const std::string& text,
                                                      const std::string& source = "<certificate>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset is the best position nlohmann reports; translate to a line
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ParseError(source, line, "", "malformed JSON");
  }
  if (!j.is_object()) throw ParseError(source, 0, "", "document must be an object");

  CertificateDocument d;
  if (!j.contains("params")) throw ParseError(source, 0, "params", "missing");
  const auto& p = j.at("params");
  d.params = {detail::json_number(p, "m", source),     detail::json_number(p, "L", source),
              detail::json_number(p, "alpha", source), detail::json_number(p, "eta", source),
              detail::json_number(p, "c1", source),    detail::json_number(p, "c2", source)};
  try {
    d.params.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(source, 0, "params", e.what());
  }
  if (j.contains("tol")) {
    d.tol = detail::json_number(j, "tol", source);
    if (d.tol < 0.0) throw ParseError(source, 0, "tol", "must be >= 0");
  }

  if (!j.contains("certificates") || !j.at("certificates").is_array())
    throw ParseError(source, 0, "certificates", "expected an array");
  std::size_t index = 0;
  for (const auto& c : j.at("certificates")) {
    const std::string where = "certificates[" + std::to_string(index++) + "]";
    if (!c.is_object()) throw ParseError(source, 0, where, "expected an object");
    Certificate cert;
    if (!c.contains("case") || !c.at("case").is_string())
      throw ParseError(source, 0, where + ".case", "expected a string");
    try {
      cert.case_tag = parse_case_tag(c.at("case").get<std::string>());
    } catch (const Error& e) {
      throw ParseError(source, 0, where + ".case", e.what());
    }
    cert.rho_sq = detail::json_number(c, "rho_sq", source);
    cert.h = detail::json_number(c, "h", source);
    if (!c.contains("p") || !c.at("p").is_array())
      throw ParseError(source, 0, where + ".p", "expected an array");
    std::vector<double> entries;
    for (const auto& v : c.at("p")) {
      if (!v.is_number()) throw ParseError(source, 0, where + ".p", "expected numbers");
      entries.push_back(v.get<double>());
    }
    const std::size_t want = cert.case_tag == CaseTag::Theorem1 ? 1 : 4;
    if (entries.size() != want)
      throw ParseError(source, 0, where + ".p",
                       "expected " + std::to_string(want) + " entries (row-major)");
    for (double v : entries)
      if (!std::isfinite(v)) throw ParseError(source, 0, where + ".p", "non-finite entry");
    if (want == 1) {
      cert.p = SymMatrix{{entries[0]}};
    } else {
      if (entries[1] != entries[2])
        throw ParseError(source, 0, where + ".p", "P must be symmetric");
      cert.p = SymMatrix::sym2(entries[0], entries[1], entries[3]);
    }
    d.certificates.push_back(std::move(cert));
  }
  if (d.certificates.empty()) throw ParseError(source, 0, "certificates", "empty");
  return d;
}

inline CertificateDocument read_certificate_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open certificate '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_certificate_document(ss.str(), path.string());
}

inline void write_certificate_file(const std::filesystem::path& path,
                                   const CertificateDocument& d) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << write_certificate_document(d);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace afgd
