#include <algorithm>
#include <set>
#include <thread>

#include "paa/semantics/interpreter.hpp"
#include "paa/syntax/parser.hpp"

namespace paa {

namespace {

bool witnessed(const AliasType& P, const AliasKey& key, const AbstractAddress& target) {
  const PairSet* start = P.get(key);
  if (!start) return false;
  std::vector<const PairSet*> todo{start};
  std::set<SsaVar> seen;
  while (!todo.empty()) {
    const PairSet* s = todo.back();
    todo.pop_back();
    for (const auto& [t, q] : *s) {
      if (q <= 0.0) continue;
      if (auto* a = std::get_if<AbstractAddress>(&t)) {
        if (*a == target) return true;
      } else if (const PairSet* next = P.get(std::get<SsaVar>(t)); next && seen.insert(std::get<SsaVar>(t)).second) {
        todo.push_back(next);
      }
    }
  }
  return false;
}

}  // namespace

std::vector<Violation> conforms(const ConcreteMemory& m, const AliasType& P) {
  std::vector<Violation> out;
  for (const auto& [x, v] : m.env)
    if (const ConcreteAddress* a = v.addr())
      if (!witnessed(P, x, a->abstract())) out.push_back({x.str(), a->str()});
  for (const auto& [c, v] : m.store)
    if (const ConcreteAddress* a = v.addr())
      if (!witnessed(P, c.abstract(), a->abstract())) out.push_back({c.abstract().str(), a->str()});
  return out;
}

double EmpiricalDistribution::frequency(const std::string& key, const std::string& target) const {
  if (ok() == 0) return 0.0;
  auto k = counts.find(key);
  if (k == counts.end()) return 0.0;
  auto t = k->second.find(target);
  return t == k->second.end() ? 0.0 : static_cast<double>(t->second) / static_cast<double>(ok());
}

nlohmann::json EmpiricalDistribution::to_json() const {
  using nlohmann::json;
  json freq = json::object();
  for (const auto& [k, targets] : counts)
    for (const auto& [t, n] : targets) freq[k][t] = format_probability(frequency(k, t));
  json phi = json::object();
  for (const auto& [at, c] : phis)
    phi[at] = {{"first", c.first},
               {"executions", c.second},
               {"frequency", format_probability(static_cast<double>(c.first) / static_cast<double>(c.second))}};
  json viol = json::array();
  for (const auto& [seed, v] : violations) viol.push_back({{"seed", seed}, {"key", v.key}, {"value", v.value}});
  return {{"runs", runs},         {"failed", failed},        {"errors", errors},
          {"frequencies", freq},  {"phi", phi},              {"violating_runs", violatingRuns},
          {"violations", viol}};
}

namespace {

constexpr std::size_t kKeptViolations = 20;

void record(EmpiricalDistribution& d, const ConcreteMemory& m) {
  for (const auto& [x, v] : m.env)
    if (const ConcreteAddress* a = v.addr()) ++d.counts[x.str()][a->abstract().str()];
  for (const auto& [c, v] : m.store)
    if (const ConcreteAddress* a = v.addr()) ++d.counts[c.abstract().str()][a->abstract().str()];
  for (const auto& c : m.phiChoices) {
    auto& [first, total] = d.phis[c.at.str()];
    first += c.left;
    ++total;
  }
}

EmpiricalDistribution run_range(const Program& p, const SampleOptions& opts, std::uint64_t from, std::uint64_t to) {
  EmpiricalDistribution d;
  RunConfig rc = opts.config;
  for (std::uint64_t i = from; i < to; ++i) {
    rc.seed = opts.baseSeed + i;
    ++d.runs;
    ConcreteMemory m;
    try {
      m = interpret(p, rc);
    } catch (const RuntimeError& e) {
      ++d.failed;
      ++d.errors[e.code()];
      continue;
    }
    record(d, m);
    if (opts.expected) {
      auto vs = conforms(m, *opts.expected);
      if (!vs.empty()) ++d.violatingRuns;
      for (auto& v : vs)
        if (d.violations.size() < kKeptViolations) d.violations.emplace_back(rc.seed, std::move(v));
    }
  }
  return d;
}

void absorb(EmpiricalDistribution& into, const EmpiricalDistribution& part) {
  into.runs += part.runs;
  into.failed += part.failed;
  into.violatingRuns += part.violatingRuns;
  for (const auto& [code, n] : part.errors) into.errors[code] += n;
  for (const auto& [k, targets] : part.counts)
    for (const auto& [t, n] : targets) into.counts[k][t] += n;
  for (const auto& [at, c] : part.phis) {
    into.phis[at].first += c.first;
    into.phis[at].second += c.second;
  }
  for (const auto& v : part.violations)
    if (into.violations.size() < kKeptViolations) into.violations.push_back(v);
}

}  // namespace

EmpiricalDistribution sample(const Program& p, const SampleOptions& opts) {
  unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(opts.runs)));
  if (threads <= 1) return run_range(p, opts, 0, opts.runs);

  std::vector<EmpiricalDistribution> parts(threads);
  std::vector<std::thread> pool;
  std::uint64_t chunk = (opts.runs + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::uint64_t from = std::min<std::uint64_t>(opts.runs, t * chunk);
    std::uint64_t to = std::min<std::uint64_t>(opts.runs, from + chunk);
    pool.emplace_back([&, t, from, to] { parts[t] = run_range(p, opts, from, to); });
  }
  for (auto& th : pool) th.join();
  EmpiricalDistribution d;
  for (const auto& part : parts) absorb(d, part);
  return d;
}

}  // namespace paa
