// Seeded concrete interpreter for SSA-DisLang. Each statement form acts on
// memory the way the corresponding analysis rule describes it, and branches
// are drawn from the same annotations the analysis consumes, so runs can be
// compared against analyzed alias types.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "paa/analysis/alias_type.hpp"
#include "paa/syntax/ast.hpp"

namespace paa {

struct ConcreteAddress {
  std::string machine;
  Region region;
  std::int64_t instance = 0;  // allocation count at a malloc site; 0 for declared regions
  std::int64_t offset = 0;

  friend auto operator<=>(const ConcreteAddress&, const ConcreteAddress&) = default;
  friend bool operator==(const ConcreteAddress&, const ConcreteAddress&) = default;

  AbstractAddress abstract() const { return AbstractAddress{machine, region, offset}; }
  // `m0:a[1]`, `m1:malloc@2#3[0]`
  std::string str() const;
};

struct ConcreteValue {
  struct Int {
    std::int64_t n = 0;
    friend bool operator==(const Int&, const Int&) = default;
  };
  struct Addr {
    ConcreteAddress addr;
    friend bool operator==(const Addr&, const Addr&) = default;
  };
  struct Uninit {
    friend bool operator==(const Uninit&, const Uninit&) = default;
  };

  std::variant<Uninit, Int, Addr> v;

  friend bool operator==(const ConcreteValue&, const ConcreteValue&) = default;

  const ConcreteAddress* addr() const {
    auto* a = std::get_if<Addr>(&v);
    return a ? &a->addr : nullptr;
  }
  std::string str() const;
};

enum class BranchMode { Annotated, Concrete };

struct RunConfig {
  std::uint64_t seed = 0;
  std::uint64_t maxSteps = 1'000'000;
  BranchMode branchMode = BranchMode::Annotated;
  double threshold = 0.5;  // same role as the analysis threshold for run/reform
};

struct PhiChoice {
  Span at;
  SsaVar target;
  bool left = true;  // took the first argument
};

struct ConcreteMemory {
  std::map<SsaVar, ConcreteValue> env;
  std::map<ConcreteAddress, ConcreteValue> store;
  std::vector<PhiChoice> phiChoices;
  std::uint64_t steps = 0;

  friend bool operator==(const ConcreteMemory& a, const ConcreteMemory& b) {
    return a.env == b.env && a.store == b.store && a.steps == b.steps;
  }

  nlohmann::json to_json() const;
};

// Codes: uninit-read, not-an-address, oob-offset, step-limit, unknown-machine,
// unknown-region.
class RuntimeError : public std::runtime_error {
 public:
  RuntimeError(std::string code, Span at, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)), at_(at) {}
  const std::string& code() const { return code_; }
  const Span& at() const { return at_; }

 private:
  std::string code_;
  Span at_;
};

// Throws RuntimeError.
ConcreteMemory interpret(const Program& p, const RunConfig& rc);

struct Violation {
  std::string key;    // variable or abstracted cell
  std::string value;  // concrete address found there
};

// Support soundness: every address held by a variable or cell has a
// positive-probability witness in P(key). Variable targets stand for every
// address reachable from them through positive-probability pairs.
std::vector<Violation> conforms(const ConcreteMemory& m, const AliasType& P);

struct SampleOptions {
  std::uint64_t runs = 1000;
  std::uint64_t baseSeed = 0;
  RunConfig config;              // seed is overwritten per run
  const AliasType* expected = nullptr;  // when set, each run is checked with conforms
  unsigned threads = 1;
};

struct EmpiricalDistribution {
  std::uint64_t runs = 0;
  std::uint64_t failed = 0;
  std::map<std::string, std::uint64_t> errors;  // code -> count
  // key -> abstracted address -> number of successful runs holding it
  std::map<std::string, std::map<std::string, std::uint64_t>> counts;
  // fi statement "line:col" -> (runs taking the first argument, runs reaching it)
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> phis;
  std::uint64_t violatingRuns = 0;
  std::vector<std::pair<std::uint64_t, Violation>> violations;  // (seed, violation), first few

  std::uint64_t ok() const { return runs - failed; }
  double frequency(const std::string& key, const std::string& target) const;
  nlohmann::json to_json() const;
};

EmpiricalDistribution sample(const Program& p, const SampleOptions& opts);

}  // namespace paa
