#include "stabhom/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "stabhom/codespace.hpp"
#include "stabhom/descend.hpp"
#include "stabhom/errors.hpp"
#include "stabhom/format.hpp"
#include "stabhom/parallel.hpp"
#include "stabhom/tolerances.hpp"

#ifndef STABHOM_DEFAULT_FIXTURES
#define STABHOM_DEFAULT_FIXTURES "fixtures"
#endif

namespace stabhom {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Fixture serialization

namespace {

const std::set<std::string> kFixtureKeys = {
    "schema",    "name",      "topic", "provenance",        "inequality",     "bound_value",       "sense",
    "assignment", "state",    "separable_parties", "hybrid_parties", "expected_mismatch", "claims"};
const std::set<std::string> kClaimKeys = {"kind", "value", "relation", "citation", "params"};
const std::set<std::string> kClaimKinds = {"lhv",        "separable", "hybrid",   "quantum_value", "quantum_max",
                                           "algebraic",  "derivation", "lift",    "image_set",     "operator",
                                           "violated",   "discord"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw DomainError(what + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!allowed.count(k)) throw DomainError("unknown field '" + k + "' in " + what);
  }
}

std::vector<std::vector<int>> parties_from_json(const json& j) {
  std::vector<std::vector<int>> out;
  for (const auto& g : j) out.push_back(g.get<std::vector<int>>());
  return out;
}

}  // namespace

Inequality Fixture::inequality() const {
  Inequality q;
  if (inequality_text.find('<') != std::string::npos) {
    q = parse(inequality_text);
  } else {
    q.ast = canonicalize(parse_expression(inequality_text));
  }
  q.name = name;
  q.provenance = provenance;
  return q;
}

double Fixture::stated_bound() const {
  if (bound_value) return *bound_value;
  const Inequality q = inequality();
  if (!q.ast.bound) throw DomainError("fixture " + name + " states no bound");
  return q.ast.bound->to_double();
}

json Fixture::to_json() const {
  json j;
  j["schema"] = kCatalogSchema;
  j["name"] = name;
  j["topic"] = topic;
  j["provenance"] = provenance;
  j["inequality"] = inequality_text;
  if (bound_value) j["bound_value"] = *bound_value;
  j["sense"] = to_string(sense);
  j["assignment"] = assignment;
  if (state) j["state"] = *state;
  if (!separable_parties.empty()) j["separable_parties"] = separable_parties;
  if (!hybrid_parties.empty()) j["hybrid_parties"] = hybrid_parties;
  j["expected_mismatch"] = expected_mismatch;
  j["claims"] = json::array();
  for (const auto& c : claims) {
    json cj;
    cj["kind"] = c.kind;
    cj["value"] = c.value;
    cj["relation"] = c.relation;
    cj["citation"] = c.citation;
    if (!c.params.empty()) cj["params"] = c.params;
    j["claims"].push_back(cj);
  }
  return j;
}

Fixture Fixture::from_json(const json& j) {
  check_keys(j, kFixtureKeys, "fixture");
  if (!j.contains("schema") || j.at("schema") != kCatalogSchema) {
    throw DomainError("unsupported or missing schema version (expected " + std::to_string(kCatalogSchema) + ")");
  }
  Fixture f;
  f.name = j.at("name").get<std::string>();
  if (f.name.empty()) throw DomainError("fixture name is empty");
  f.topic = j.value("topic", "");
  f.provenance = j.value("provenance", "");
  f.inequality_text = j.at("inequality").get<std::string>();
  if (j.contains("bound_value")) f.bound_value = j.at("bound_value").get<double>();
  f.sense = sense_from_string(j.value("sense", "upper"));
  f.assignment = j.value("assignment", "");
  if (j.contains("state")) f.state = j.at("state");
  if (j.contains("separable_parties")) f.separable_parties = parties_from_json(j.at("separable_parties"));
  if (j.contains("hybrid_parties")) f.hybrid_parties = parties_from_json(j.at("hybrid_parties"));
  f.expected_mismatch = j.value("expected_mismatch", false);
  for (const auto& cj : j.value("claims", json::array())) {
    check_keys(cj, kClaimKeys, "claim");
    Claim c;
    c.kind = cj.at("kind").get<std::string>();
    if (!kClaimKinds.count(c.kind)) throw DomainError("unknown claim kind '" + c.kind + "'");
    c.value = cj.at("value");
    c.relation = cj.value("relation", "tight");
    if (c.relation != "tight" && c.relation != "valid") throw DomainError("claim relation must be tight or valid");
    c.citation = cj.value("citation", "");
    if (c.citation.empty()) throw DomainError("claim '" + c.kind + "' has no citation");
    if (cj.contains("params")) c.params = cj.at("params");
    f.claims.push_back(std::move(c));
  }
  f.inequality();  // must parse
  return f;
}

Fixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open fixture " + path);
  try {
    return Fixture::from_json(json::parse(in));
  } catch (const std::exception& e) {
    throw Error("fixture " + std::filesystem::path(path).filename().string() + ": " + e.what());
  }
}

std::vector<Fixture> load_catalog(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error("fixtures directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Fixture> out;
  std::set<std::string> names;
  for (const auto& p : files) {
    out.push_back(load_fixture(p.string()));
    if (!names.insert(out.back().name).second) throw Error("duplicate fixture name " + out.back().name);
  }
  return out;
}

std::string default_fixtures_dir() {
  if (const char* env = std::getenv("STABHOM_FIXTURES"); env && *env) return env;
  return STABHOM_DEFAULT_FIXTURES;
}

// ---------------------------------------------------------------------------
// States

DensityOperator density_from_spec(const json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "pure") return DensityOperator::pure(state_from_spec(spec.at("state")));
  if (kind == "mixed") return DensityOperator::maximally_mixed(spec.at("width").get<int>());
  if (kind == "cq") {
    const auto probs = spec.at("probs").get<std::vector<double>>();
    std::vector<Eigen::Vector2cd> kets;
    for (const auto& k : spec.at("kets")) {
      const StateVector s = state_from_spec(k);
      if (s.width() != 1) throw DimensionError("classical-quantum kets must be single-qubit states");
      kets.push_back(s.amplitudes());
    }
    std::vector<DensityOperator> rhos;
    for (const auto& r : spec.at("rhos")) rhos.push_back(density_from_spec(r));
    return make_cq_state(probs, kets, rhos);
  }
  throw DomainError("unknown density kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Audit

namespace {

InequalityAST negated(const InequalityAST& ast) {
  InequalityAST out = ast;
  for (auto& t : out.linear) t.coefficient = -t.coefficient;
  for (auto& s : out.squares) s.coefficient = -s.coefficient;
  out.bound.reset();
  return out;
}

double orient_value(Sense s, double v) {
  switch (s) {
    case Sense::Upper: return v;
    case Sense::Lower: return -v;
    case Sense::TwoSided: return std::abs(v);
  }
  return v;
}

LogicalEncoding encoding_from(const json& j) { return LogicalEncoding::from_json(j); }

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Context {
  const Fixture& fixture;
  const AuditOptions& options;
  Inequality ineq;
  Assignment assignment;
  std::optional<StateVector> state;
  BoundReport report;
};

void resolve_assignment(Context& cx) {
  const Fixture& f = cx.fixture;
  if (f.state) cx.state = state_from_spec(*f.state);
  if (f.assignment != "optimize") {
    if (!f.assignment.empty()) cx.assignment = parse_assignment(f.assignment);
    return;
  }
  SeesawOptions so;
  so.seed = cx.options.rng_seed;
  so.workers = 1;
  so.fixed_state = cx.state;
  const InequalityAST& ast = cx.ineq.ast;
  std::optional<SeesawResult> best;
  if (f.sense != Sense::Lower) best = seesaw_max(ast, so);
  if (f.sense != Sense::Upper) {
    so.minimize = true;
    SeesawResult down = seesaw_max(ast, so);
    if (!best || -down.value > best->value + 1e-9) best = down;
  }
  cx.assignment = best->assignment;
  if (!cx.state) cx.state = best->state;
}

void compute_numbers(Context& cx) {
  const Fixture& f = cx.fixture;
  const InequalityAST& ast = cx.ineq.ast;
  BoundReport& r = cx.report;
  try {
    if (ast.is_linear()) {
      const LhvResult l = lhv_enumerate(ast, 1);
      r.lhv = oriented(f.sense, l.min.to_double(), l.max.to_double());
    } else {
      const NonlinearLhvResult l = lhv_bound_nonlinear(ast, 1);
      r.lhv = oriented(f.sense, l.min, l.max);
    }
  } catch (const CapacityError&) {
    r.lhv.reset();
  }
  const OperatorExpression op = assign_paulis(ast, cx.assignment, cx.state ? cx.state->width() : 0);
  if (!f.separable_parties.empty()) {
    if (!ast.is_linear()) throw DomainError("separable bounds need a linear expression");
    SeparableOptions so;
    so.seed = cx.options.rng_seed;
    so.workers = 1;
    const double hi = f.sense == Sense::Lower ? 0.0 : separable_bound(op.linear, f.separable_parties, so).value;
    const double lo =
        f.sense == Sense::Upper ? 0.0 : -separable_bound(op.linear.scaled(-1.0), f.separable_parties, so).value;
    r.separable = oriented(f.sense, lo, hi);
  }
  if (!f.hybrid_parties.empty()) {
    const double hi = hybrid_bound(ast, f.hybrid_parties).value;
    const double lo = -hybrid_bound(negated(ast), f.hybrid_parties).value;
    r.hybrid = oriented(f.sense, lo, hi);
  }
  if (cx.state) {
    r.quantum_value = orient_value(f.sense, op.value(cx.state->amplitudes()));
    r.witness_state = cx.state;
  }
  const QuantumExtremes q = quantum_extremes(ast, cx.assignment, cx.options.rng_seed);
  r.quantum_max = oriented(f.sense, q.min, q.max);
  const AlgebraicBound a = algebraic_bound(ast);
  r.algebraic = oriented(f.sense, a.min, a.max);
}

bool numeric_match(const Claim& c, double computed, double tol) {
  const double claimed = c.value.get<double>();
  if (c.relation == "valid") return computed <= claimed + tol;
  return std::abs(computed - claimed) <= tol;
}

std::map<SettingSymbol, Letter> letters_from(const json& j) {
  std::map<SettingSymbol, Letter> out;
  for (const auto& [k, v] : j.items()) {
    const std::string s = v.get<std::string>();
    if (s.size() != 1) throw DomainError("letter must be X, Y or Z");
    out[SettingSymbol::parse(k)] = letter_from_char(s[0]);
  }
  return out;
}

ClaimResult evaluate_derivation(const Context& cx, const Claim& c) {
  const json& p = c.params;
  Inequality seed = parse(p.at("seed").get<std::string>());
  seed.name = cx.fixture.name + "-seed";
  DescendOptions o;
  o.mode = substitution_mode_from_string(p.value("mode", "per_occurrence"));
  o.expand_partners = p.value("expand", false);
  o.rng_seed = cx.options.rng_seed;
  o.workers = 1;
  if (p.contains("seed_state")) o.seed_state = state_from_spec(p.at("seed_state"));
  const DescendReport rep = enumerate_descendants(seed, p.at("site").get<int>(), encoding_from(p.at("encoding")),
                                                  letters_from(p.at("letters")), o);
  const bool relabel = p.value("match", "exact") == "relabeling";
  const InequalityAST target = canonicalize(cx.ineq.ast);
  InequalityAST target_expr = target;
  target_expr.bound.reset();
  json computed;
  computed["candidates"] = rep.candidates;
  computed["matched"] = false;
  for (const auto& d : rep.results) {
    const bool eq = relabel ? equivalent_up_to_relabeling(d.descendant.ast, target_expr)
                            : format_expression(d.descendant.ast) == format_expression(target_expr);
    if (eq) {
      computed["matched"] = true;
      computed["expression"] = format_expression(d.descendant.ast);
      computed["lhv_bound"] = d.lhv_bound;
      computed["quantum_value"] = d.quantum_value;
      break;
    }
  }
  return {c, computed, computed["matched"] == c.value};
}

ClaimResult evaluate_lift(const Context& cx, const Claim& c, double tol) {
  const json& p = c.params;
  const std::string letter = p.at("letter").get<std::string>();
  const LiftedWitness w = lift_coherence_witness(p.at("threshold").get<double>(), letter_from_char(letter.at(0)),
                                                 encoding_from(p.at("encoding")));
  json computed;
  computed["bound"] = w.bound;
  computed["expression"] = format_expression(w.witness.ast);
  computed["images"] = w.image_count;
  bool ok = std::abs(w.bound - c.value.get<double>()) <= tol;
  if (p.contains("expression")) {
    const InequalityAST expected = canonicalize(parse_expression(p.at("expression").get<std::string>()));
    ok = ok && format_expression(expected) == format_expression(w.witness.ast);
  } else {
    InequalityAST own = cx.ineq.ast;
    own.bound.reset();
    ok = ok && format_expression(canonicalize(own)) == format_expression(w.witness.ast);
  }
  return {c, computed, ok};
}

ClaimResult evaluate_image_set(const Claim& c) {
  const json& p = c.params;
  const LogicalEncoding enc = encoding_from(p.at("encoding"));
  const std::string letter = p.at("letter").get<std::string>();
  const ImageSet set = image_set(enc, letter_from_char(letter.at(0)));
  const std::vector<std::string> members = set.strings();
  json computed = members;
  std::set<std::string> have(members.begin(), members.end());
  bool ok = true;
  std::set<std::string> want;
  for (const auto& m : p.at("members")) {
    const std::string text = SignedPauliTerm::parse(m.get<std::string>(), enc.width()).str();
    want.insert(text);
    ok = ok && have.count(text);
  }
  if (p.value("exact", false)) ok = ok && want.size() == have.size();
  return {c, computed, ok == c.value.get<bool>()};
}

// "+X1X2", "-Y1Y2" or a weighted "-1.5*Y1Y2".
void add_term_text(PauliSum& sum, const std::string& text, int width) {
  const auto star = text.find('*');
  if (star == std::string::npos) {
    const SignedPauliTerm term = SignedPauliTerm::parse(text, width);
    sum.add(term.coefficient(), term.string());
    return;
  }
  const double w = std::stod(text.substr(0, star));
  const SignedPauliTerm term = SignedPauliTerm::parse(text.substr(star + 1), width);
  sum.add(w * term.coefficient(), term.string());
}

ClaimResult evaluate_operator(const Context& cx, const Claim& c, double tol) {
  const Assignment assignment =
      c.params.contains("assignment") ? parse_assignment(c.params.at("assignment").get<std::string>()) : cx.assignment;
  const OperatorExpression op = assign_paulis(cx.ineq.ast, assignment);
  PauliSum expected(op.width);
  for (const auto& t : c.value) add_term_text(expected, t.get<std::string>(), op.width);
  PauliSum diff = op.linear;
  diff.add(expected, -1.0);
  json computed = json::array();
  for (const auto& t : op.linear.pruned().terms()) computed.push_back(t.str());
  return {c, computed, diff.pruned(tol).empty()};
}

ClaimResult evaluate_discord(const Claim& c) {
  const json& p = c.params;
  const DiscordCheck d = discord_condition_check(density_from_spec(p.at("state")), p.at("epsilon").get<double>());
  json computed;
  computed["pass"] = d.pass;
  computed["x_correlator"] = d.x_correlator;
  computed["y_correlator"] = d.y_correlator;
  computed["degenerate"] = d.degenerate;
  return {c, computed, d.pass == c.value.get<bool>()};
}

ClaimResult evaluate_claim(const Context& cx, const Claim& c) {
  const double tol = cx.options.tolerance;
  const BoundReport& r = cx.report;
  auto numeric = [&](const std::optional<double>& v) -> ClaimResult {
    if (!v) return {c, nullptr, false};
    return {c, *v, numeric_match(c, *v, tol)};
  };
  if (c.kind == "lhv") return numeric(r.lhv);
  if (c.kind == "separable") return numeric(r.separable);
  if (c.kind == "hybrid") return numeric(r.hybrid);
  if (c.kind == "quantum_value") return numeric(r.quantum_value);
  if (c.kind == "quantum_max") return numeric(r.quantum_max);
  if (c.kind == "algebraic") return numeric(r.algebraic);
  if (c.kind == "violated") {
    if (!r.quantum_value) return {c, nullptr, false};
    const bool v = *r.quantum_value > cx.fixture.stated_bound() + tol::kViolation;
    return {c, v, v == c.value.get<bool>()};
  }
  if (c.kind == "derivation") return evaluate_derivation(cx, c);
  if (c.kind == "lift") return evaluate_lift(cx, c, tol);
  if (c.kind == "image_set") return evaluate_image_set(c);
  if (c.kind == "operator") return evaluate_operator(cx, c, tol);
  if (c.kind == "discord") return evaluate_discord(c);
  throw DomainError("unknown claim kind '" + c.kind + "'");
}

}  // namespace

BoundReport audit_fixture(const Fixture& f, const AuditOptions& options) {
  Context cx{f, options, f.inequality(), {}, std::nullopt, {}};
  cx.report.name = f.name;
  cx.report.expected_mismatch = f.expected_mismatch;
  resolve_assignment(cx);
  compute_numbers(cx);
  BoundReport& r = cx.report;
  for (const auto& c : f.claims) {
    r.claims.push_back(evaluate_claim(cx, c));
    r.claim_match = r.claim_match && r.claims.back().match;
  }
  const double qv = r.quantum_value.value_or(-std::numeric_limits<double>::infinity());
  if (!r.claim_match) {
    r.verdict = "audit-mismatch";
  } else if (r.lhv && qv > *r.lhv + tol::kViolation) {
    r.verdict = "nonlocality";
  } else if (r.separable && qv > *r.separable + tol::kViolation) {
    r.verdict = "entanglement-only";
  } else {
    r.verdict = "no-violation";
  }
  return r;
}

json BoundReport::to_json() const {
  json j;
  j["name"] = name;
  j["lhv"] = number_or_null(lhv);
  j["separable"] = number_or_null(separable);
  j["hybrid"] = number_or_null(hybrid);
  j["quantum_value"] = number_or_null(quantum_value);
  j["quantum_max"] = number_or_null(quantum_max);
  j["algebraic"] = number_or_null(algebraic);
  j["verdict"] = verdict;
  j["paper_claim"] = json::array();
  for (const auto& c : claims) {
    json cj;
    cj["kind"] = c.claim.kind;
    cj["claimed"] = c.claim.value;
    cj["computed"] = c.computed;
    cj["relation"] = c.claim.relation;
    cj["citation"] = c.claim.citation;
    cj["match"] = c.match;
    j["paper_claim"].push_back(cj);
  }
  j["claim_match"] = claim_match;
  return j;
}

std::string BoundReport::to_text() const {
  std::ostringstream out;
  auto num = [](const std::optional<double>& v) { return v ? format_sig9(*v) : std::string("-"); };
  out << name << "  verdict=" << verdict << (expected_mismatch && !claim_match ? " (expected)" : "") << "\n";
  out << "  lhv=" << num(lhv) << " separable=" << num(separable) << " hybrid=" << num(hybrid)
      << " quantum_value=" << num(quantum_value) << " quantum_max=" << num(quantum_max)
      << " algebraic=" << num(algebraic) << "\n";
  for (const auto& c : claims) {
    out << "  [" << (c.match ? "ok" : "MISMATCH") << "] " << c.claim.kind << ": claimed " << c.claim.value.dump();
    if (c.computed.is_number()) {
      out << ", computed " << format_sig9(c.computed.get<double>());
    } else {
      out << ", computed " << c.computed.dump();
    }
    out << "  (" << c.claim.citation << ")\n";
  }
  return out.str();
}

int AuditSummary::exit_code() const {
  if (!errors.empty() || reports.empty()) return 2;
  return unexpected_mismatches.empty() ? 0 : 1;
}

json AuditSummary::to_json() const {
  json j;
  j["reports"] = json::array();
  for (const auto& r : reports) j["reports"].push_back(r.to_json());
  j["summary"]["fixtures"] = reports.size();
  j["summary"]["expected_mismatches"] = expected_mismatches;
  j["summary"]["unexpected_mismatches"] = unexpected_mismatches;
  j["summary"]["errors"] = json::array();
  for (const auto& [n, m] : errors) j["summary"]["errors"].push_back({{"name", n}, {"message", m}});
  j["summary"]["exit_code"] = exit_code();
  return j;
}

AuditSummary audit_all(const std::vector<Fixture>& fixtures, const AuditOptions& options) {
  std::vector<std::optional<BoundReport>> reports(fixtures.size());
  std::vector<std::string> failures(fixtures.size());
  parallel_for(fixtures.size(), options.workers, [&](std::size_t i) {
    try {
      reports[i] = audit_fixture(fixtures[i], options);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  AuditSummary s;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    if (!reports[i]) {
      s.errors.emplace_back(fixtures[i].name, failures[i]);
      continue;
    }
    if (!reports[i]->claim_match) {
      (fixtures[i].expected_mismatch ? s.expected_mismatches : s.unexpected_mismatches).push_back(fixtures[i].name);
    }
    s.reports.push_back(std::move(*reports[i]));
  }
  return s;
}

}  // namespace stabhom
