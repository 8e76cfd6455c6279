#include "paa/cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "paa/analysis/analyzer.hpp"
#include "paa/pcc/certificate.hpp"
#include "paa/semantics/interpreter.hpp"
#include "paa/ssa/validate.hpp"
#include "paa/syntax/parser.hpp"

namespace paa {

using nlohmann::json;

namespace {

struct Options {
  std::string file;
  std::string cert;
  std::string output;
  double threshold = 0.5;
  std::string ifMerge = "weighted";
  std::string whileMode = "iterated";
  bool lenientMd = false;
  std::string format = "text";
  bool timing = false;
  std::uint64_t seed = 0;
  std::uint64_t runs = 1000;
  std::uint64_t maxSteps = 1'000'000;
  std::string branchMode = "annotated";
  std::optional<double> expect;
  unsigned threads = 1;
};

AnalysisConfig analysis_config(const Options& o) {
  AnalysisConfig cfg;
  cfg.threshold = o.threshold;
  cfg.ifMerge = o.ifMerge == "max-union" ? MergeMode::MaxUnion : MergeMode::Weighted;
  cfg.whileMode = o.whileMode == "literal" ? WhileMode::Literal : WhileMode::Iterated;
  cfg.strictMd = !o.lenientMd;
  return cfg;
}

RunConfig run_config(const Options& o) {
  RunConfig rc;
  rc.seed = o.seed;
  rc.maxSteps = o.maxSteps;
  rc.branchMode = o.branchMode == "concrete" ? BranchMode::Concrete : BranchMode::Annotated;
  rc.threshold = o.threshold;
  return rc;
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

json diagnostic_json(const Diagnostic& d) {
  return {{"severity", severity_name(d.severity)}, {"code", d.code}, {"at", d.span.str()}, {"message", d.message}};
}

void print_diagnostic(std::ostream& err, const std::string& file, const Diagnostic& d) {
  err << file << ":" << d.span.str() << ": " << severity_name(d.severity) << "[" << d.code << "]: " << d.message
      << "\n";
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

class Driver {
 public:
  Driver(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

  int analyze_cmd() {
    if (int rc = load()) return rc;
    auto t0 = std::chrono::steady_clock::now();
    std::optional<AnalysisResult> r = run_analysis();
    if (!r) return kExitAnalysis;
    double ms = elapsed_ms(t0);

    json report{{"command", "analyze"}, {"file", o_.file}, {"digest", program_digest(prog_)},
                {"config", analysis_config(o_).to_json()}};
    json diags = json::array();
    for (const auto& d : diags_) diags.push_back(diagnostic_json(d));
    report["diagnostics"] = std::move(diags);
    json points = json::array();
    for (const auto& [at, P] : r->perPoint) {
      json point = json::object();
      point["at"] = std::to_string(at.first) + ":" + std::to_string(at.second);
      point["alias"] = to_json(P);
      points.push_back(std::move(point));
    }
    report["points"] = std::move(points);
    report["final"] = to_json(r->final);
    if (o_.timing) report["timing"] = {{"analysis_ms", ms}};
    emit(report);
    return kExitOk;
  }

  int prove_cmd() {
    if (int rc = load()) return rc;
    std::optional<AnalysisResult> r = run_analysis();
    if (!r) return kExitAnalysis;
    json cert = export_certificate(*r, prog_, analysis_config(o_));
    std::string text = serialize_certificate(cert);
    if (o_.output.empty() || o_.output == "-") {
      out_ << text;
      return kExitOk;
    }
    std::ofstream f(o_.output, std::ios::binary);
    if (!(f << text)) {
      err_ << "paa: cannot write " << o_.output << "\n";
      return kExitInput;
    }
    std::size_t nodes = r->derivation ? r->derivation->node_count() : 0;
    emit({{"command", "prove"}, {"certificate", o_.output}, {"digest", cert["digest"]}, {"nodes", nodes}});
    return kExitOk;
  }

  int check_cmd() {
    if (int rc = load()) return rc;
    std::string text;
    if (!read_file(o_.cert, text)) {
      err_ << "paa: cannot read " << o_.cert << "\n";
      return kExitInput;
    }
    Verdict v = check_certificate_text(text, prog_, analysis_config(o_));
    json report{{"command", "check"}, {"accepted", v.accepted}};
    if (!v.accepted) {
      report["reason"] = v.reason;
      report["path"] = v.path;
      report["detail"] = v.detail;
      err_ << o_.cert << ": " << v.str() << "\n";
    }
    emit(report);
    return v.accepted ? kExitOk : kExitRejected;
  }

  int run_cmd() {
    if (int rc = load()) return rc;
    ConcreteMemory m;
    try {
      m = interpret(prog_, run_config(o_));
    } catch (const RuntimeError& e) {
      err_ << o_.file << ":" << e.at().str() << ": error[" << e.code() << "]: " << e.what() << "\n";
      return kExitAnalysis;
    }
    emit({{"command", "run"}, {"seed", o_.seed}, {"memory", m.to_json()}});
    return kExitOk;
  }

  int sample_cmd() {
    if (int rc = load()) return rc;
    std::optional<AnalysisResult> r = run_analysis();
    if (!r) return kExitAnalysis;
    auto t0 = std::chrono::steady_clock::now();
    SampleOptions so;
    so.runs = o_.runs;
    so.baseSeed = o_.seed;
    so.config = run_config(o_);
    so.expected = &r->final;
    so.threads = o_.threads;
    EmpiricalDistribution d = sample(prog_, so);
    double ms = elapsed_ms(t0);

    json dist = d.to_json();
    json phis = json::array();
    bool withinTolerance = true;
    for (const Stmt::Phi* phi : phis_of(prog_.body)) {
      const Stmt* s = phiStmts_.at(phi);
      auto it = d.phis.find(s->span.str());
      const PairSet* set = r->final.get(phi->target);
      double analyzed = 0.0;
      if (set)
        if (auto w = set->find(phi->left); w != set->end()) analyzed = w->second;
      json row{{"at", s->span.str()}, {"target", phi->target.str()}, {"analyzed", format_probability(analyzed)}};
      if (it == d.phis.end() || it->second.second == 0) {
        row["executions"] = 0;
      } else {
        double observed = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
        row["executions"] = it->second.second;
        row["observed"] = format_probability(observed);
        if (o_.expect) {
          bool ok = std::abs(observed - analyzed) <= *o_.expect;
          row["within_tolerance"] = ok;
          withinTolerance = withinTolerance && ok;
        }
      }
      phis.push_back(row);
    }
    std::string verdict = d.violatingRuns ? "violation" : withinTolerance ? "ok" : "tolerance";
    if (d.ok() == 0) verdict = "no-successful-runs";
    json report{{"command", "sample"},
                {"runs", d.runs},
                {"seed", o_.seed},
                {"failed", d.failed},
                {"errors", dist["errors"]},
                {"frequencies", dist["frequencies"]},
                {"phi", phis},
                {"conformance", {{"violating_runs", d.violatingRuns}, {"violations", dist["violations"]}}},
                {"verdict", verdict}};
    if (o_.expect) report["tolerance"] = *o_.expect;
    if (o_.timing) report["timing"] = {{"sample_ms", ms}};
    emit(report);
    for (const auto& [seed, v] : d.violations)
      err_ << o_.file << ": seed " << seed << ": " << v.key << " holds " << v.value << " with no witness\n";
    if (verdict == "no-successful-runs") return kExitAnalysis;
    return verdict == "ok" ? kExitOk : kExitRejected;
  }

 private:
  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
  Program prog_;
  Diagnostics diags_;
  std::map<const Stmt::Phi*, const Stmt*> phiStmts_;

  int load() {
    std::string text;
    if (!read_file(o_.file, text)) {
      err_ << "paa: cannot read " << o_.file << "\n";
      return kExitInput;
    }
    try {
      prog_ = parse(text);
    } catch (const ParseError& e) {
      err_ << e.format(o_.file) << "\n";
      return kExitInput;
    }
    diags_ = validate_ssa(prog_);
    for (const auto& d : diags_) print_diagnostic(err_, o_.file, d);
    return has_errors(diags_) ? kExitInput : kExitOk;
  }

  std::optional<AnalysisResult> run_analysis() {
    try {
      AnalysisResult r = analyze(prog_, analysis_config(o_));
      for (const auto& w : r.warnings) {
        print_diagnostic(err_, o_.file, w);
        diags_.push_back(w);
      }
      return r;
    } catch (const AnalysisError& e) {
      err_ << o_.file << ":" << e.at().str() << ": error[" << e.code() << "]: " << e.what() << "\n";
      return std::nullopt;
    }
  }

  std::vector<const Stmt::Phi*> phis_of(const Stmt& s) {
    std::vector<const Stmt::Phi*> out;
    collect(s, out);
    return out;
  }

  void collect(const Stmt& s, std::vector<const Stmt::Phi*>& out) {
    if (auto* p = std::get_if<Stmt::Phi>(&s.node)) {
      out.push_back(p);
      phiStmts_[p] = &s;
    } else if (auto* q = std::get_if<Stmt::Seq>(&s.node)) {
      collect(*q->first, out);
      collect(*q->second, out);
    } else if (auto* r = std::get_if<Stmt::RunStmt>(&s.node)) {
      collect(*r->body, out);
    } else if (auto* i = std::get_if<Stmt::If>(&s.node)) {
      collect(*i->thenBranch, out);
      collect(*i->elseBranch, out);
    } else if (auto* w = std::get_if<Stmt::While>(&s.node)) {
      collect(*w->body, out);
    }
  }

  void emit(const json& report) {
    if (o_.format == "structured")
      out_ << report.dump(2) << "\n";
    else
      render_text(report);
  }

  // ---- text rendering of the structured report ----

  static std::string pairs(const json& set) {
    std::string s = "{";
    bool first = true;
    for (const auto& [t, p] : set.items()) {
      s += (first ? "(" : ", (") + t + ", " + p.get<std::string>() + ")";
      first = false;
    }
    return s + "}";
  }

  void alias(const json& P, const std::string& indent) {
    if (P.empty()) out_ << indent << "(empty)\n";
    for (const auto& [k, set] : P.items()) out_ << indent << k << " -> " << pairs(set) << "\n";
  }

  void render_text(const json& r) {
    const std::string cmd = r["command"];
    if (cmd == "analyze") {
      out_ << "file: " << r["file"].get<std::string>() << "\n";
      out_ << "digest: " << r["digest"].get<std::string>() << "\n";
      const json& c = r["config"];
      out_ << "config: threshold=" << c["threshold"].get<std::string>() << " if-merge=" << c["if_merge"].get<std::string>()
           << " while-mode=" << c["while_mode"].get<std::string>() << " strict-md=" << (c["strict_md"].get<bool>() ? "true" : "false")
           << "\n";
      out_ << "diagnostics:" << (r["diagnostics"].empty() ? " none" : "") << "\n";
      for (const auto& d : r["diagnostics"])
        out_ << "  " << d["at"].get<std::string>() << " " << d["severity"].get<std::string>() << "["
             << d["code"].get<std::string>() << "]: " << d["message"].get<std::string>() << "\n";
      out_ << "points:\n";
      for (const auto& p : r["points"]) {
        out_ << "  before " << p["at"].get<std::string>() << ":\n";
        alias(p["alias"], "    ");
      }
      out_ << "final:\n";
      alias(r["final"], "  ");
    } else if (cmd == "prove") {
      out_ << "certificate: " << r["certificate"].get<std::string>() << " (" << r["nodes"].get<std::size_t>()
           << " derivation nodes, digest " << r["digest"].get<std::string>() << ")\n";
    } else if (cmd == "check") {
      out_ << (r["accepted"].get<bool>() ? "accepted" : "rejected") << "\n";
    } else if (cmd == "run") {
      const json& m = r["memory"];
      out_ << "seed: " << r["seed"].get<std::uint64_t>() << "\nsteps: " << m["steps"].get<std::uint64_t>() << "\nenv:\n";
      for (const auto& [k, v] : m["env"].items()) out_ << "  " << k << " = " << v.get<std::string>() << "\n";
      out_ << "store:\n";
      for (const auto& [k, v] : m["store"].items()) out_ << "  " << k << " = " << v.get<std::string>() << "\n";
      out_ << "fi choices:\n";
      for (const auto& c : m["phi_choices"])
        out_ << "  " << c["at"].get<std::string>() << " " << c["target"].get<std::string>() << " <- argument "
             << c["arg"].get<int>() + 1 << "\n";
    } else if (cmd == "sample") {
      out_ << "runs: " << r["runs"].get<std::uint64_t>() << " from seed " << r["seed"].get<std::uint64_t>()
           << " (" << r["failed"].get<std::uint64_t>() << " failed)\n";
      for (const auto& [code, n] : r["errors"].items()) out_ << "  " << code << ": " << n.get<std::uint64_t>() << "\n";
      out_ << "frequencies:\n";
      for (const auto& [k, set] : r["frequencies"].items()) out_ << "  " << k << " -> " << pairs(set) << "\n";
      out_ << "fi statements:\n";
      for (const auto& p : r["phi"]) {
        out_ << "  " << p["at"].get<std::string>() << " " << p["target"].get<std::string>() << ": analyzed "
             << p["analyzed"].get<std::string>();
        if (p.contains("observed")) out_ << ", observed " << p["observed"].get<std::string>();
        out_ << " over " << p["executions"].get<std::uint64_t>() << " executions";
        if (p.contains("within_tolerance")) out_ << (p["within_tolerance"].get<bool>() ? " [ok]" : " [outside tolerance]");
        out_ << "\n";
      }
      out_ << "conformance: " << r["conformance"]["violating_runs"].get<std::uint64_t>() << " violating runs\n";
      out_ << "verdict: " << r["verdict"].get<std::string>() << "\n";
    }
    if (r.contains("timing"))
      for (const auto& [k, v] : r["timing"].items()) out_ << "timing: " << k << " " << v.get<double>() << "\n";
  }
};

void add_analysis_flags(CLI::App& sub, Options& o) {
  sub.add_option("--threshold", o.threshold, "Reaching-probability threshold for reform and run")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("PAA_THRESHOLD");
  sub.add_option("--if-merge", o.ifMerge, "Join of if branches")->check(CLI::IsMember({"weighted", "max-union"}));
  sub.add_option("--while-mode", o.whileMode, "Reading of the loop rule")->check(CLI::IsMember({"iterated", "literal"}));
  sub.add_flag("--lenient-md", o.lenientMd, "Skip md statements whose premises fail instead of stopping");
}

void add_output_flags(CLI::App& sub, Options& o) {
  sub.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "structured"}));
}

void add_run_flags(CLI::App& sub, Options& o) {
  sub.add_option("--seed", o.seed, "Seed (first seed when sampling)");
  sub.add_option("--max-steps", o.maxSteps, "Step budget per run")->check(CLI::PositiveNumber);
  sub.add_option("--branch-mode", o.branchMode, "How if/while choose")->check(CLI::IsMember({"annotated", "concrete"}));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Probabilistic alias analysis for SSA-DisLang programs", "paa"};
  app.require_subcommand(1, 1);

  auto* analyze = app.add_subcommand("analyze", "Analyze a program and print its alias types");
  analyze->add_option("file", o.file, "Program source")->required();
  add_analysis_flags(*analyze, o);
  add_output_flags(*analyze, o);
  analyze->add_flag("--timing", o.timing, "Include wall-clock timing in the report");

  auto* prove = app.add_subcommand("prove", "Analyze a program and write a certificate");
  prove->add_option("file", o.file, "Program source")->required();
  prove->add_option("-o,--output", o.output, "Certificate path ('-' for stdout)");
  add_analysis_flags(*prove, o);
  add_output_flags(*prove, o);

  auto* check = app.add_subcommand("check", "Verify a certificate against a program");
  check->add_option("file", o.file, "Program source")->required();
  check->add_option("cert", o.cert, "Certificate")->required();
  add_analysis_flags(*check, o);
  add_output_flags(*check, o);

  auto* run = app.add_subcommand("run", "Interpret a program once");
  run->add_option("file", o.file, "Program source")->required();
  add_run_flags(*run, o);
  run->add_option("--threshold", o.threshold, "Reaching-probability threshold for reform and run")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("PAA_THRESHOLD");
  add_output_flags(*run, o);

  auto* sample = app.add_subcommand("sample", "Interpret many seeds and check them against the analysis");
  sample->add_option("file", o.file, "Program source")->required();
  sample->add_option("-n,--runs", o.runs, "Number of runs")->check(CLI::PositiveNumber);
  add_run_flags(*sample, o);
  sample->add_option("--expect", o.expect, "Tolerance for fi frequencies against analyzed probabilities")
      ->check(CLI::Range(0.0, 1.0));
  sample->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 256u));
  add_analysis_flags(*sample, o);
  add_output_flags(*sample, o);
  sample->add_flag("--timing", o.timing, "Include wall-clock timing in the report");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "paa: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  Driver d(o, out, err);
  if (analyze->parsed()) return d.analyze_cmd();
  if (prove->parsed()) return d.prove_cmd();
  if (check->parsed()) return d.check_cmd();
  if (run->parsed()) return d.run_cmd();
  return d.sample_cmd();
}

}  // namespace paa
