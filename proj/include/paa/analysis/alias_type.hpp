// Data model shared by the analysis, the certificate checker and the
// interpreter: abstract addresses, abstract values and alias types.
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "json.hpp"
#include "paa/syntax/ast.hpp"

namespace paa {

struct MallocSite {
  int site = 0;
  friend auto operator<=>(const MallocSite&, const MallocSite&) = default;
  friend bool operator==(const MallocSite&, const MallocSite&) = default;
};

// A declared root variable's region, or an allocation site.
using Region = std::variant<std::string, MallocSite>;

struct AbstractAddress {
  std::string machine;
  Region region;
  std::int64_t offset = 0;

  friend auto operator<=>(const AbstractAddress&, const AbstractAddress&) = default;
  friend bool operator==(const AbstractAddress&, const AbstractAddress&) = default;

  // `m0:a[2]`, `m1:malloc@3[0]`
  std::string str() const;
};

std::string region_str(const Region& r);

struct AbstractValue {
  struct Int {
    std::int64_t n = 0;
    friend bool operator==(const Int&, const Int&) = default;
  };
  struct Addr {
    AbstractAddress addr;
    friend bool operator==(const Addr&, const Addr&) = default;
  };
  struct Bottom {
    friend bool operator==(const Bottom&, const Bottom&) = default;
  };

  std::variant<Int, Addr, Bottom> v;

  friend bool operator==(const AbstractValue&, const AbstractValue&) = default;

  static AbstractValue integer(std::int64_t n) { return {Int{n}}; }
  static AbstractValue address(AbstractAddress a) { return {Addr{std::move(a)}}; }
  static AbstractValue bottom() { return {Bottom{}}; }

  const AbstractAddress* addr() const {
    auto* a = std::get_if<Addr>(&v);
    return a ? &a->addr : nullptr;
  }
  bool is_bottom() const { return std::holds_alternative<Bottom>(v); }

  // `int:5`, `bot`, or the address text.
  std::string str() const;
};

// Variables order before addresses; each kind orders lexicographically.
using AliasKey = std::variant<SsaVar, AbstractAddress>;

std::string key_str(const AliasKey& k);

// Set of probabilistic pairs: target -> probability, targets distinct.
using PairSet = std::map<AliasKey, double>;

class AliasType {
 public:
  using Map = std::map<AliasKey, PairSet>;

  // nullptr when the key is outside the domain.
  const PairSet* get(const AliasKey& k) const;

  // Replaces the key's set. Throws std::logic_error if a probability lies
  // outside [0,1]; rules never need clamping.
  void set(const AliasKey& k, PairSet pairs);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const Map& entries() const { return entries_; }

  friend bool operator==(const AliasType&, const AliasType&) = default;

 private:
  Map entries_;
};

nlohmann::json to_json(const PairSet& s);
nlohmann::json to_json(const AliasType& t);

// Keys whose set in `post` differs from `pre` (merges never drop keys).
AliasType delta(const AliasType& pre, const AliasType& post);

std::string format_alias_type(const AliasType& t, const std::string& indent = "");

}  // namespace paa
