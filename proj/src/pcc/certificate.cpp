#include "paa/pcc/certificate.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

#include "paa/syntax/parser.hpp"

namespace paa {

std::string program_digest(const Program& p) {
  std::string text = pretty(p);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

nlohmann::json export_certificate(const AnalysisResult& r, const Program& p, const AnalysisConfig& cfg) {
  return nlohmann::json{{"version", kCertificateVersion},
                        {"digest", program_digest(p)},
                        {"config", cfg.to_json()},
                        {"final", to_json(r.final)},
                        {"derivation", r.derivation ? to_json(*r.derivation) : nlohmann::json(nullptr)}};
}

std::string serialize_certificate(const nlohmann::json& cert) { return cert.dump(2) + "\n"; }

std::string Verdict::str() const {
  if (accepted) return "accepted";
  std::string s = "rejected: " + reason;
  if (!path.empty()) s += " at " + path;
  if (!detail.empty()) s += ": " + detail;
  return s;
}

Verdict check_certificate_text(std::string_view text, const Program& p, const AnalysisConfig& cfg) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) return Verdict{false, "malformed", "", "not a JSON document"};
  return check_certificate(doc, p, cfg);
}

}  // namespace paa
