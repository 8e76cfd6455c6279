#include "paa/analysis/alias_type.hpp"

#include <sstream>
#include <stdexcept>

#include "paa/syntax/parser.hpp"

namespace paa {

std::string region_str(const Region& r) {
  if (auto* s = std::get_if<std::string>(&r)) return *s;
  return "malloc@" + std::to_string(std::get<MallocSite>(r).site);
}

std::string AbstractAddress::str() const {
  return machine + ":" + region_str(region) + "[" + std::to_string(offset) + "]";
}

std::string AbstractValue::str() const {
  if (auto* i = std::get_if<Int>(&v)) return "int:" + std::to_string(i->n);
  if (auto* a = std::get_if<Addr>(&v)) return a->addr.str();
  return "bot";
}

std::string key_str(const AliasKey& k) {
  if (auto* v = std::get_if<SsaVar>(&k)) return v->str();
  return std::get<AbstractAddress>(k).str();
}

const PairSet* AliasType::get(const AliasKey& k) const {
  auto it = entries_.find(k);
  return it == entries_.end() ? nullptr : &it->second;
}

void AliasType::set(const AliasKey& k, PairSet pairs) {
  for (const auto& [t, p] : pairs)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::logic_error("probability " + format_probability(p) + " for " + key_str(k) + " -> " +
                             key_str(t) + " outside [0,1]");
  entries_[k] = std::move(pairs);
}

nlohmann::json to_json(const PairSet& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [t, p] : s) j[key_str(t)] = format_probability(p);
  return j;
}

nlohmann::json to_json(const AliasType& t) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, s] : t.entries()) j[key_str(k)] = to_json(s);
  return j;
}

AliasType delta(const AliasType& pre, const AliasType& post) {
  AliasType d;
  for (const auto& [k, s] : post.entries()) {
    const PairSet* before = pre.get(k);
    if (!before || *before != s) d.set(k, s);
  }
  return d;
}

std::string format_alias_type(const AliasType& t, const std::string& indent) {
  std::ostringstream os;
  if (t.empty()) os << indent << "(empty)\n";
  for (const auto& [k, s] : t.entries()) {
    os << indent << key_str(k) << " -> {";
    bool first = true;
    for (const auto& [target, p] : s) {
      os << (first ? "" : ", ") << "(" << key_str(target) << ", " << format_probability(p) << ")";
      first = false;
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace paa
