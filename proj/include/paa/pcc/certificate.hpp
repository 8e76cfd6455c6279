// Certificates: an analysis derivation packaged with the program digest and
// the configuration it was produced under, plus an independent checker.
#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "paa/analysis/analyzer.hpp"

namespace paa {

inline constexpr int kCertificateVersion = 1;

// Lower-case hex SHA-256 of the canonical pretty-printed program.
std::string program_digest(const Program& p);

nlohmann::json export_certificate(const AnalysisResult& r, const Program& p, const AnalysisConfig& cfg);

// Canonical text form: two-space indented JSON with sorted keys and a
// trailing newline.
std::string serialize_certificate(const nlohmann::json& cert);

struct Verdict {
  bool accepted = false;
  // malformed | wrong-program | wrong-config | node-mismatch | final-mismatch
  std::string reason;
  // JSON pointer to the offending value, e.g. /derivation/premises/1
  std::string path;
  std::string detail;

  std::string str() const;
};

// Replays every rule application against p under cfg. Never throws on
// hostile input.
Verdict check_certificate(const nlohmann::json& cert, const Program& p, const AnalysisConfig& cfg);
Verdict check_certificate_text(std::string_view text, const Program& p, const AnalysisConfig& cfg);

}  // namespace paa
