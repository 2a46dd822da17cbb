#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stabhom/bounds.hpp"
#include "stabhom/catalog.hpp"
#include "stabhom/codespace.hpp"
#include "stabhom/descend.hpp"
#include "stabhom/errors.hpp"
#include "stabhom/format.hpp"
#include "stabhom/ineq.hpp"
#include "stabhom/parallel.hpp"

using nlohmann::json;
using namespace stabhom;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitOperational = 2;

struct Globals {
  int workers = 0;
  std::uint64_t rng_seed = 0;
  bool json = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Inequality load_inequality(const std::string& path) {
  const std::string text = read_file(path);
  try {
    Inequality q = parse(text);
    if (q.name.empty()) q.name = std::filesystem::path(path).stem().string();
    return q;
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

// "ghz-3", a JSON object, or a path to a JSON file.
LogicalEncoding encoding_from_text(const std::string& text) {
  if (text.rfind("ghz-", 0) == 0) return LogicalEncoding::from_json(text);
  if (!text.empty() && text.front() == '{') return LogicalEncoding::from_json(json::parse(text));
  return LogicalEncoding::from_json(json::parse(read_file(text)));
}

LogicalEncoding pick_encoding(int ghz, const std::string& encoding) {
  if (ghz > 0 && !encoding.empty()) throw DomainError("give either --ghz or --encoding, not both");
  if (ghz > 0) {
    if (ghz > kMaxImageWidth) {
      throw CapacityError("encoding width " + std::to_string(ghz) + " exceeds the limit of " +
                          std::to_string(kMaxImageWidth) + " qubits");
    }
    return LogicalEncoding::ghz(ghz);
  }
  if (encoding.empty()) throw DomainError("an encoding is required (--ghz N or --encoding SPEC)");
  return encoding_from_text(encoding);
}

// "1|2,3" or "[[1],[2,3]]".
std::vector<std::vector<int>> parse_parties(const std::string& text) {
  if (!text.empty() && text.front() == '[') return json::parse(text).get<std::vector<std::vector<int>>>();
  std::vector<std::vector<int>> out;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, '|')) {
    std::vector<int> g;
    std::stringstream sites(group);
    std::string site;
    while (std::getline(sites, site, ',')) {
      if (!site.empty()) g.push_back(std::stoi(site));
    }
    if (g.empty()) throw DomainError("empty party group in '" + text + "'");
    out.push_back(g);
  }
  return out;
}

std::vector<std::vector<int>> singleton_parties(int sites) {
  std::vector<std::vector<int>> out;
  for (int s = 1; s <= sites; ++s) out.push_back({s});
  return out;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------------------

struct ParseArgs {
  std::string file;
  std::string text;
};

int cmd_parse(const Globals& g, const ParseArgs& a) {
  if (a.file.empty() == a.text.empty()) throw DomainError("give exactly one of FILE or --text");
  const Inequality q = a.file.empty() ? parse(a.text) : load_inequality(a.file);
  const InequalityAST c = canonicalize(q.ast);
  if (g.json) {
    json j;
    j["name"] = q.name;
    j["provenance"] = q.provenance;
    j["canonical"] = pretty_print(c);
    j["expression"] = format_expression(c);
    j["bound"] = c.bound ? json(c.bound->str()) : json(nullptr);
    j["relation"] = c.relation == Relation::LessEqual ? "<=" : "<";
    j["linear"] = c.is_linear();
    j["sites"] = c.max_site();
    j["settings"] = json::array();
    for (const auto& s : c.settings()) j["settings"].push_back(s.str());
    print_json(j);
  } else {
    std::cout << pretty_print(c) << "\n";
  }
  return kExitOk;
}

struct ImagesArgs {
  int ghz = 0;
  std::string encoding;
  std::string letter = "X";
};

int cmd_images(const Globals& g, const ImagesArgs& a) {
  const LogicalEncoding enc = pick_encoding(a.ghz, a.encoding);
  if (a.letter.size() != 1) throw DomainError("letter must be one of I, X, Y, Z");
  const Letter letter = letter_from_char(a.letter[0]);
  const ImageSet set = image_set(enc, letter, g.workers == 0 ? default_workers() : g.workers);
  if (g.json) {
    json j;
    j["encoding"] = enc.label();
    j["width"] = enc.width();
    j["letter"] = a.letter;
    j["members"] = set.strings();
    print_json(j);
  } else {
    for (const auto& s : set.strings()) std::cout << s << "\n";
  }
  return kExitOk;
}

struct DescendArgs {
  std::string seed;
  int site = 0;
  int ghz = 0;
  std::string encoding;
  std::string letters;
  std::string mode = "all_images";
  bool no_expand = false;
  std::uint64_t cap = kDefaultAssignmentCap;
  std::string seed_state;
  int limit = 0;
};

// "A2=X,A2'=Y"; without a mapping the symbolic settings at the site take X, Y, Z
// in canonical order.
std::map<SettingSymbol, Letter> parse_letters(const std::string& text, const InequalityAST& seed, int site) {
  std::map<SettingSymbol, Letter> out;
  if (text.empty()) {
    const char letters[] = {'X', 'Y', 'Z'};
    std::size_t k = 0;
    for (const auto& s : seed.settings()) {
      if (s.site != site || s.is_fixed_pauli()) continue;
      if (k >= 3) throw DomainError("more than three settings at site " + std::to_string(site) + "; give --letters");
      out[s] = letter_from_char(letters[k++]);
    }
    return out;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq + 2 != item.size()) throw DomainError("letter mapping must look like A2=X");
    out[SettingSymbol::parse(item.substr(0, eq))] = letter_from_char(item[eq + 1]);
  }
  return out;
}

int cmd_descend(const Globals& g, const DescendArgs& a) {
  const Inequality seed = load_inequality(a.seed);
  const LogicalEncoding enc = pick_encoding(a.ghz, a.encoding);
  if (a.cap == 0) throw DomainError("--cap must be positive");
  DescendOptions o;
  o.mode = substitution_mode_from_string(a.mode);
  o.expand_partners = !a.no_expand;
  o.cap = a.cap;
  o.rng_seed = g.rng_seed;
  o.workers = g.workers;
  if (!a.seed_state.empty()) o.seed_state = state_from_text(a.seed_state);
  const DescendReport rep =
      enumerate_descendants(seed, a.site, enc, parse_letters(a.letters, canonicalize(seed.ast), a.site), o);
  if (rep.truncated) {
    std::cerr << "warning: assignment cap " << a.cap << " reached; evaluated " << rep.candidates << " of "
              << rep.total << " candidates\n";
  }
  const std::size_t shown =
      a.limit > 0 ? std::min<std::size_t>(static_cast<std::size_t>(a.limit), rep.results.size()) : rep.results.size();
  if (g.json) {
    json j = rep.to_json();
    j["results"].erase(j["results"].begin() + static_cast<std::ptrdiff_t>(shown), j["results"].end());
    print_json(j);
    return kExitOk;
  }
  std::cout << "seed " << rep.seed_name << ", site " << rep.target_site << ", encoding " << rep.encoding << ", mode "
            << to_string(rep.mode) << "\n";
  std::cout << "candidates " << rep.candidates << " of " << rep.total << ", distinct " << rep.results.size() << "\n";
  if (!rep.seed_realization.empty()) std::cout << "seed realization " << format_assignment(rep.seed_realization) << "\n";
  for (std::size_t i = 0; i < shown; ++i) {
    const DescendantResult& r = rep.results[i];
    std::cout << (r.accepted ? "+ " : "  ") << "lhv=" << format_sig9(r.lhv_bound)
              << " quantum=" << format_sig9(r.quantum_value)
              << " ratio=" << (std::isfinite(r.violation_ratio) ? format_sig9(r.violation_ratio) : std::string("inf"))
              << "  " << format_expression(r.descendant.ast) << "\n";
  }
  return kExitOk;
}

struct BoundArgs {
  std::string file;
  std::string kind = "lhv";
  std::string parties;
  std::string assign;
  std::string sense = "upper";
};

int cmd_bound(const Globals& g, const BoundArgs& a) {
  const Inequality q = load_inequality(a.file);
  const InequalityAST& ast = q.ast;
  const Sense sense = sense_from_string(a.sense);
  double value = 0.0;
  json cert;
  const Assignment assignment = a.assign.empty() ? Assignment{} : parse_assignment(a.assign);

  if (a.kind == "lhv") {
    if (!ast.is_linear()) throw DomainError("expression has square terms; use --kind nonlinear");
    const LhvResult r = lhv_enumerate(ast, g.workers);
    value = oriented(sense, r.min.to_double(), r.max.to_double());
    cert["max"] = r.max.str();
    cert["min"] = r.min.str();
    cert["argmax"] = r.argmax.to_json();
    cert["argmin"] = r.argmin.to_json();
    cert["strategies"] = r.strategies;
  } else if (a.kind == "nonlinear") {
    const NonlinearLhvResult r = lhv_bound_nonlinear(ast, g.workers);
    value = oriented(sense, r.min, r.max);
    cert["max"] = r.max;
    cert["min"] = r.min;
    cert["argmax"] = json::array();
    for (const auto& m : r.argmax) cert["argmax"].push_back({{"weight", m.weight}, {"strategy", m.strategy.to_json()}});
    cert["argmin"] = r.argmin.to_json();
    cert["distinct_points"] = r.distinct_points;
  } else if (a.kind == "separable") {
    if (!ast.is_linear()) throw DomainError("separable bounds need a linear expression");
    const OperatorExpression op = assign_paulis(ast, assignment);
    const auto parties = a.parties.empty() ? singleton_parties(op.width) : parse_parties(a.parties);
    SeparableOptions so;
    so.seed = g.rng_seed;
    so.workers = g.workers;
    std::optional<SeparableResult> hi, lo;
    if (sense != Sense::Lower) hi = separable_bound(op.linear, parties, so);
    if (sense != Sense::Upper) lo = separable_bound(op.linear.scaled(-1.0), parties, so);
    value = oriented(sense, lo ? -lo->value : 0.0, hi ? hi->value : 0.0);
    const SeparableResult& best = (!hi || (lo && lo->value > hi->value)) ? *lo : *hi;
    cert["parties"] = parties;
    cert["product_state"] = best.product_state.to_json();
  } else if (a.kind == "hybrid") {
    if (a.parties.empty()) throw DomainError("hybrid bounds need --parties");
    const auto parties = parse_parties(a.parties);
    const HybridResult hi = hybrid_bound(ast, parties);
    InequalityAST neg = ast;
    for (auto& t : neg.linear) t.coefficient = -t.coefficient;
    for (auto& s : neg.squares) s.coefficient = -s.coefficient;
    const HybridResult lo = hybrid_bound(neg, parties);
    value = oriented(sense, -lo.value, hi.value);
    cert["side_a"] = hi.side_a;
    cert["side_b"] = hi.side_b;
  } else if (a.kind == "quantum") {
    const bool symbolic = std::any_of(ast.settings().begin(), ast.settings().end(),
                                      [](const SettingSymbol& s) { return !s.is_fixed_pauli(); });
    if (symbolic && a.assign.empty()) {
      if (!ast.is_linear()) throw DomainError("see-saw needs a linear expression; give --assign for nonlinear ones");
      SeesawOptions so;
      so.seed = g.rng_seed;
      so.workers = g.workers;
      std::optional<SeesawResult> hi, lo;
      if (sense != Sense::Lower) hi = seesaw_max(ast, so);
      if (sense != Sense::Upper) {
        so.minimize = true;
        lo = seesaw_max(ast, so);
      }
      value = oriented(sense, lo ? lo->value : 0.0, hi ? hi->value : 0.0);
      const SeesawResult& best = (!hi || (lo && -lo->value > hi->value)) ? *lo : *hi;
      cert["assignment"] = format_assignment(best.assignment);
      cert["state"] = best.state.to_json();
    } else {
      const QuantumExtremes r = quantum_extremes(ast, assignment, g.rng_seed);
      value = oriented(sense, r.min, r.max);
      const bool use_min = sense == Sense::Lower || (sense == Sense::TwoSided && -r.min > r.max);
      cert["state"] = (use_min ? r.argmin : r.argmax).to_json();
      cert["heuristic"] = r.heuristic;
    }
  } else {
    throw DomainError("unknown bound kind '" + a.kind + "' (lhv, nonlinear, separable, hybrid, quantum)");
  }

  if (g.json) {
    json j;
    j["name"] = q.name;
    j["kind"] = a.kind;
    j["sense"] = to_string(sense);
    j["value"] = value;
    j["display"] = format_sig9(value);
    j["certificate"] = cert;
    print_json(j);
  } else {
    std::cout << format_sig9(value) << "\n";
  }
  return kExitOk;
}

struct QvalueArgs {
  std::string file;
  std::string state;
  std::string assign;
  std::string sense = "upper";
};

int cmd_qvalue(const Globals& g, const QvalueArgs& a) {
  const Inequality q = load_inequality(a.file);
  const StateVector psi = state_from_text(a.state);
  const Assignment assignment = a.assign.empty() ? Assignment{} : parse_assignment(a.assign);
  const double raw = quantum_value(q.ast, assignment, psi);
  const Sense sense = sense_from_string(a.sense);
  const double value = sense == Sense::Upper ? raw : (sense == Sense::Lower ? -raw : std::abs(raw));
  if (g.json) {
    json j;
    j["name"] = q.name;
    j["sense"] = to_string(sense);
    j["value"] = value;
    j["display"] = format_sig9(value);
    j["raw"] = raw;
    print_json(j);
  } else {
    std::cout << format_sig9(value) << "\n";
  }
  return kExitOk;
}

struct AuditArgs {
  std::string dir;
  double tolerance = 1e-6;
  std::vector<std::string> only;
};

int cmd_audit(const Globals& g, const AuditArgs& a) {
  const std::string dir = a.dir.empty() ? default_fixtures_dir() : a.dir;
  std::vector<Fixture> fixtures = load_catalog(dir);
  if (!a.only.empty()) {
    std::erase_if(fixtures, [&](const Fixture& f) {
      return std::find(a.only.begin(), a.only.end(), f.name) == a.only.end();
    });
  }
  AuditOptions o;
  o.tolerance = a.tolerance;
  o.rng_seed = g.rng_seed;
  o.workers = g.workers;
  const AuditSummary s = audit_all(fixtures, o);
  if (g.json) {
    print_json(s.to_json());
  } else {
    for (const auto& r : s.reports) std::cout << r.to_text();
    for (const auto& [name, msg] : s.errors) std::cout << name << "  ERROR " << msg << "\n";
    std::cout << "fixtures " << s.reports.size() << ", errors " << s.errors.size() << ", expected mismatches "
              << s.expected_mismatches.size() << ", unexpected mismatches " << s.unexpected_mismatches.size() << "\n";
    if (fixtures.empty()) std::cout << "no fixtures found in " << dir << "\n";
  }
  return s.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilizer-homomorphism inequality toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--workers", g.workers, "Worker threads (0 = available parallelism)")->check(CLI::NonNegativeNumber);
  app.add_option("--rng-seed", g.rng_seed, "Seed for randomized optimizers");
  app.add_flag("--json", g.json, "Emit JSON");

  ParseArgs parse_args;
  auto* parse_cmd = app.add_subcommand("parse", "Parse an .ineq file and print its canonical form");
  parse_cmd->add_option("file", parse_args.file, "Inequality file");
  parse_cmd->add_option("--text", parse_args.text, "Inequality text instead of a file");
  parse_cmd->add_flag("--json", g.json, "Emit JSON");

  ImagesArgs images_args;
  auto* images_cmd = app.add_subcommand("images", "List the Pauli strings acting as a logical Pauli on a code space");
  images_cmd->add_option("--ghz", images_args.ghz, "GHZ encoding on N qubits");
  images_cmd->add_option("--encoding", images_args.encoding, "Encoding JSON, JSON file, or ghz-N");
  images_cmd->add_option("--letter", images_args.letter, "Logical letter I, X, Y or Z");
  images_cmd->add_flag("--json", g.json, "Emit JSON");

  DescendArgs descend_args;
  auto* descend_cmd = app.add_subcommand("descend", "Generate descendant inequalities from a seed");
  descend_cmd->add_option("seed", descend_args.seed, "Seed .ineq file")->required();
  descend_cmd->add_option("--site", descend_args.site, "Site replaced by the logical qubit")->required();
  descend_cmd->add_option("--ghz", descend_args.ghz, "GHZ encoding on N qubits");
  descend_cmd->add_option("--encoding", descend_args.encoding, "Encoding JSON, JSON file, or ghz-N");
  descend_cmd->add_option("--letters", descend_args.letters, "Logical letters of the site's settings, e.g. A2=X,A2'=Y");
  descend_cmd->add_option("--mode", descend_args.mode, "per_occurrence, uniform or all_images");
  descend_cmd->add_flag("--no-expand", descend_args.no_expand, "Keep partner settings symbolic");
  descend_cmd->add_option("--cap", descend_args.cap, "Maximum number of image assignments")->check(CLI::PositiveNumber);
  descend_cmd->add_option("--seed-state", descend_args.seed_state, "Seed state (default GHZ)");
  descend_cmd->add_option("--limit", descend_args.limit, "Show only the first N descendants");
  descend_cmd->add_flag("--json", g.json, "Emit JSON");

  BoundArgs bound_args;
  auto* bound_cmd = app.add_subcommand("bound", "Compute a bound of an inequality's left-hand side");
  bound_cmd->add_option("file", bound_args.file, "Inequality file")->required();
  bound_cmd->add_option("--kind", bound_args.kind, "lhv, nonlinear, separable, hybrid or quantum");
  bound_cmd->add_option("--parties", bound_args.parties, "Party groups, e.g. 1|2,3");
  bound_cmd->add_option("--assign", bound_args.assign, "Observables, e.g. A1=X;A1'=(X+Y)/sqrt2");
  bound_cmd->add_option("--sense", bound_args.sense, "upper, lower or two-sided");
  bound_cmd->add_flag("--json", g.json, "Emit JSON");

  QvalueArgs qvalue_args;
  auto* qvalue_cmd = app.add_subcommand("qvalue", "Expectation value on a given state");
  qvalue_cmd->add_option("file", qvalue_args.file, "Inequality file")->required();
  qvalue_cmd->add_option("--state", qvalue_args.state, "State, e.g. ghz:3 or pair:011,100,-1")->required();
  qvalue_cmd->add_option("--assign", qvalue_args.assign, "Observables for symbolic settings");
  qvalue_cmd->add_option("--sense", qvalue_args.sense, "upper, lower or two-sided");
  qvalue_cmd->add_flag("--json", g.json, "Emit JSON");

  AuditArgs audit_args;
  auto* audit_cmd = app.add_subcommand("audit", "Check every fixture's claims");
  audit_cmd->add_option("dir", audit_args.dir, "Fixtures directory (default STABHOM_FIXTURES or the built-in path)");
  audit_cmd->add_option("--tolerance", audit_args.tolerance, "Claim tolerance")->check(CLI::PositiveNumber);
  audit_cmd->add_option("--fixture", audit_args.only, "Audit only the named fixtures");
  audit_cmd->add_flag("--json", g.json, "Emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitOperational;
  }

  try {
    if (*parse_cmd) return cmd_parse(g, parse_args);
    if (*images_cmd) return cmd_images(g, images_args);
    if (*descend_cmd) return cmd_descend(g, descend_args);
    if (*bound_cmd) return cmd_bound(g, bound_args);
    if (*qvalue_cmd) return cmd_qvalue(g, qvalue_args);
    if (*audit_cmd) return cmd_audit(g, audit_args);
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitOperational;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOperational;
  }
  return kExitOperational;
}
