#include <gtest/gtest.h>

#include <filesystem>

#include "afgd/certificates_io.hpp"

using namespace afgd;

namespace {

const std::filesystem::path kData = std::filesystem::path(AFGD_SOURCE_DIR) / "data";

std::string key_of(const std::string& text) {
  try {
    parse_certificate_document(text);
  } catch (const ParseError& e) {
    return e.key();
  }
  return "<no error>";
}

const std::string kGood = R"({
  "params": {"m": 2, "L": 8, "alpha": 0.1, "eta": 0.2, "c1": 0.5, "c2": 1},
  "certificates": [{"case": "theorem2_nonneg", "rho_sq": 0.8, "h": 0.2, "p": [1, 0, 0, 1]}]
})";

}  // namespace

TEST(CertificateIo, ShippedFixturesParse) {
  const auto p2 = read_certificate_file(kData / "sim2_p2.json");
  EXPECT_EQ(p2.params, (ProblemParams{2.0, 8.0, 0.1, 0.2, 0.5, 1.0}));
  EXPECT_EQ(p2.tol, 1e-6);
  ASSERT_EQ(p2.certificates.size(), 1u);
  EXPECT_EQ(p2.certificates[0].case_tag, CaseTag::Theorem2Nonneg);
  EXPECT_EQ(p2.certificates[0].p, SymMatrix::sym2(4.1074, -4.1697, 4.6191));
  const auto t1 = read_certificate_file(kData / "sim2_theorem1.json");
  EXPECT_EQ(t1.certificates[0].case_tag, CaseTag::Theorem1);
  EXPECT_TRUE(check_certificate(t1.params, t1.certificates[0], t1.tol));
}

TEST(CertificateIo, RoundTripIsBitStable) {
  CertificateDocument d;
  d.params = {2.0, 8.0, 0.1, 0.2, 0.5, 1.0};
  d.tol = 1e-9;
  d.certificates.push_back({SymMatrix::sym2(0.1 + 0.2, -1.0 / 3.0, 2.0 / 7.0), 0.818359375,
                            0.25, CaseTag::Theorem2Nonneg});
  d.certificates.push_back({SymMatrix{{std::nextafter(1.0, 2.0)}}, 0.84, 0.1, CaseTag::Theorem1});
  const std::string text = write_certificate_document(d);
  const auto back = parse_certificate_document(text);
  EXPECT_EQ(back, d);
  EXPECT_EQ(write_certificate_document(back), text);

  const auto path = std::filesystem::temp_directory_path() / "afgd_cert_io" / "c.json";
  write_certificate_file(path, d);
  EXPECT_EQ(read_certificate_file(path), d);
}

TEST(CertificateIo, MalformedDocuments) {
  EXPECT_NO_THROW(parse_certificate_document(kGood));
  EXPECT_THROW(parse_certificate_document("{"), ParseError);
  EXPECT_THROW(parse_certificate_document("[]"), ParseError);
  auto with = [](std::string from, std::string to) {
    std::string t = kGood;
    t.replace(t.find(from), from.size(), to);
    return t;
  };
  EXPECT_EQ(key_of(with("\"m\": 2, ", "")), "m");
  EXPECT_EQ(key_of(with("\"alpha\": 0.1", "\"alpha\": \"x\"")), "alpha");
  EXPECT_EQ(key_of(with("\"m\": 2", "\"m\": 9")), "params");
  EXPECT_EQ(key_of(with("theorem2_nonneg", "theorem3")), "certificates[0].case");
  EXPECT_EQ(key_of(with("[1, 0, 0, 1]", "[1, 0, 1]")), "certificates[0].p");
  EXPECT_EQ(key_of(with("[1, 0, 0, 1]", "[1, 0.5, 0, 1]")), "certificates[0].p");
  EXPECT_EQ(key_of(with("\"h\": 0.2, ", "")), "h");
  EXPECT_EQ(key_of(with("[{\"case\": \"theorem2_nonneg\", \"rho_sq\": 0.8, \"h\": 0.2, "
                        "\"p\": [1, 0, 0, 1]}]", "[]")),
            "certificates");
  EXPECT_THROW(read_certificate_file(kData / "missing.json"), IoError);
}

TEST(CertificateIo, MalformedJsonReportsLine) {
  try {
    parse_certificate_document("{\n  \"params\": {\n  ,\n}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}
