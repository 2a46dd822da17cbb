#include "stabhom/descend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stabhom/errors.hpp"
#include "stabhom/format.hpp"
#include "stabhom/parallel.hpp"
#include "stabhom/tolerances.hpp"

namespace stabhom {

std::string to_string(SubstitutionMode m) {
  switch (m) {
    case SubstitutionMode::PerOccurrence: return "per_occurrence";
    case SubstitutionMode::Uniform: return "uniform";
    case SubstitutionMode::AllImages: return "all_images";
  }
  return "per_occurrence";
}

SubstitutionMode substitution_mode_from_string(const std::string& s) {
  if (s == "per_occurrence") return SubstitutionMode::PerOccurrence;
  if (s == "uniform") return SubstitutionMode::Uniform;
  if (s == "all_images") return SubstitutionMode::AllImages;
  throw DomainError("unknown substitution mode '" + s + "' (expected per_occurrence, uniform or all_images)");
}

namespace {

// One factor of a working monomial. Generated factors carry a Pauli letter that
// is later renamed to a symbolic setting with base `origin`.
struct Slot {
  SettingSymbol symbol;
  bool generated = false;
  char origin = 'A';

  auto key() const { return std::tuple(symbol.site, symbol.base, symbol.primes, generated, origin); }
  bool operator==(const Slot& o) const { return key() == o.key(); }
  bool operator<(const Slot& o) const { return key() < o.key(); }
};

struct WorkTerm {
  double coef;
  std::vector<Slot> slots;  // sorted by site
};

// Sums terms with equal slot lists, keeping first-appearance order.
std::vector<WorkTerm> collect_terms(const std::vector<WorkTerm>& in) {
  std::vector<WorkTerm> out;
  std::map<std::vector<Slot>, std::size_t> index;
  for (auto t : in) {
    std::sort(t.slots.begin(), t.slots.end(), [](const Slot& a, const Slot& b) { return a < b; });
    auto it = index.find(t.slots);
    if (it == index.end()) {
      index.emplace(t.slots, out.size());
      out.push_back(std::move(t));
    } else {
      out[it->second].coef += t.coef;
    }
  }
  std::vector<WorkTerm> kept;
  for (auto& t : out) {
    if (std::abs(t.coef) >= tol::kPrune) kept.push_back(std::move(t));
  }
  return kept;
}

Letter target_letter(const SettingSymbol& s, const std::map<SettingSymbol, Letter>& letter_map) {
  auto it = letter_map.find(s);
  if (it != letter_map.end()) return it->second;
  if (s.is_fixed_pauli()) return letter_from_char(s.base);
  throw DomainError("setting " + s.str() + " at the target site has no logical letter");
}

std::vector<WorkTerm> prepare(const InequalityAST& seed, const SubstitutionPlan& plan) {
  if (!seed.is_linear()) throw DomainError("descendants are generated from linear seeds");
  if (plan.target_site < 1 || plan.target_site > seed.max_site()) {
    throw DomainError("target site " + std::to_string(plan.target_site) + " is not a site of the seed");
  }
  std::vector<WorkTerm> terms;
  for (const auto& lt : InequalityAST{canonicalize(seed)}.linear) {
    std::vector<WorkTerm> partial{{lt.coefficient.to_double(), {}}};
    for (const auto& s : lt.monomial) {
      const bool expand = plan.expand_partners && s.site != plan.target_site && !s.is_fixed_pauli();
      if (!expand) {
        for (auto& p : partial) p.slots.push_back({s, false, s.base});
        continue;
      }
      auto it = plan.partner_realization.find(s);
      if (it == plan.partner_realization.end()) throw DomainError("no realization for partner setting " + s.str());
      std::vector<WorkTerm> next;
      for (const auto& p : partial) {
        for (int k = 0; k < 3; ++k) {
          const double c = it->second.bloch[static_cast<std::size_t>(k)];
          if (std::abs(c) < tol::kPrune) continue;
          WorkTerm q = p;
          q.coef *= c;
          q.slots.push_back({SettingSymbol{s.site, letter_char(static_cast<Letter>(k + 1)), 0}, true, s.base});
          next.push_back(std::move(q));
        }
      }
      partial = std::move(next);
    }
    terms.insert(terms.end(), partial.begin(), partial.end());
  }
  return collect_terms(terms);
}

using ImageCache = std::map<Letter, ImageSet>;

// Logical settings at the target site with their occurrence counts, in first-seen order.
std::vector<std::pair<SettingSymbol, int>> occurrences(const std::vector<WorkTerm>& terms, int target) {
  std::vector<std::pair<SettingSymbol, int>> out;
  for (const auto& t : terms) {
    for (const auto& s : t.slots) {
      if (s.symbol.site != target || s.generated) continue;
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == s.symbol; });
      if (it == out.end()) {
        out.emplace_back(s.symbol, 1);
      } else {
        ++it->second;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Substitution substitute_prepared(const std::vector<WorkTerm>& terms, const SubstitutionPlan& plan,
                                 const ImageCache& images, int seed_width) {
  const int n = plan.encoding.width();
  const int target = plan.target_site;
  if (seed_width + n - 1 > kMaxDescendantWidth) {
    throw CapacityError("descendant would have " + std::to_string(seed_width + n - 1) + " sites; the limit is " +
                        std::to_string(kMaxDescendantWidth));
  }
  auto shift = [&](Slot s) {
    if (s.symbol.site > target) s.symbol.site += n - 1;
    return s;
  };
  std::map<SettingSymbol, int> seen;
  std::vector<WorkTerm> out;
  for (const auto& t : terms) {
    std::vector<Slot> rest;
    std::optional<Slot> logical;
    for (const auto& s : t.slots) {
      if (s.symbol.site == target && !s.generated) {
        logical = s;
      } else {
        rest.push_back(shift(s));
      }
    }
    if (!logical) {
      out.push_back({t.coef, rest});
      continue;
    }
    const SettingSymbol& sym = logical->symbol;
    const Letter letter = target_letter(sym, plan.letter_map);
    const auto& members = images.at(letter).members;
    if (members.empty()) throw DomainError("empty image set for " + std::string(1, letter_char(letter)));
    const int occurrence = seen[sym]++;
    std::vector<int> chosen;
    if (plan.mode == SubstitutionMode::AllImages) {
      chosen.resize(members.size());
      std::iota(chosen.begin(), chosen.end(), 0);
    } else {
      auto it = plan.choices.find(sym);
      if (it == plan.choices.end()) throw DomainError("no image choice for " + sym.str());
      const std::size_t idx = plan.mode == SubstitutionMode::Uniform ? 0 : static_cast<std::size_t>(occurrence);
      if (idx >= it->second.size()) throw DomainError("too few image choices for " + sym.str());
      chosen.push_back(it->second[idx]);
    }
    for (int c : chosen) {
      if (c < 0 || static_cast<std::size_t>(c) >= members.size()) {
        throw DomainError("image index " + std::to_string(c) + " out of range for " + sym.str());
      }
      const SignedPauliTerm& img = members[static_cast<std::size_t>(c)];
      WorkTerm w{t.coef * img.coefficient(), rest};
      for (int k = 0; k < n; ++k) {
        const Letter l = img.string().letter(k);
        if (l == Letter::I) continue;
        w.slots.push_back({SettingSymbol{target + k, letter_char(l), 0}, !sym.is_fixed_pauli(), sym.base});
      }
      out.push_back(std::move(w));
    }
  }
  if (plan.mode == SubstitutionMode::PerOccurrence) {
    for (const auto& [sym, idx] : plan.choices) {
      std::set<int> distinct(idx.begin(), idx.end());
      if (distinct.size() != idx.size()) throw DomainError("image choices for " + sym.str() + " are not distinct");
    }
  }

  // Rename generated letters: per (site, origin), X < Y < Z become base, base', base''.
  std::map<std::pair<int, char>, std::set<char>> letters;
  for (const auto& t : out) {
    for (const auto& s : t.slots) {
      if (s.generated) letters[{s.symbol.site, s.origin}].insert(s.symbol.base);
    }
  }
  std::map<std::tuple<int, char, char>, SettingSymbol> rename;
  Substitution result;
  for (const auto& [key, set] : letters) {
    int rank = 0;
    for (char l : std::string("XYZ")) {
      if (!set.count(l)) continue;
      const SettingSymbol sym{key.first, key.second, rank++};
      rename[{key.first, key.second, l}] = sym;
      result.realization[sym] = LocalObservable::pauli(letter_from_char(l));
    }
  }
  std::map<Monomial, double> collected;
  for (const auto& t : out) {
    Monomial m;
    for (const auto& s : t.slots) {
      m.push_back(s.generated ? rename.at({s.symbol.site, s.origin, s.symbol.base}) : s.symbol);
    }
    std::sort(m.begin(), m.end());
    for (std::size_t k = 1; k < m.size(); ++k) {
      if (m[k].site == m[k - 1].site) throw DomainError("substitution produced two settings on site " +
                                                        std::to_string(m[k].site));
    }
    collected[m] += t.coef;
  }
  for (const auto& [m, c] : collected) {
    for (const auto& s : m) {
      if (s.is_fixed_pauli() || result.realization.count(s)) continue;
      auto it = plan.partner_realization.find(SettingSymbol{s.site > target ? s.site - (n - 1) : s.site, s.base,
                                                            s.primes});
      if (it != plan.partner_realization.end()) result.realization[s] = it->second;
    }
  }

  double min_abs = std::numeric_limits<double>::infinity();
  for (const auto& [m, c] : collected) {
    if (std::abs(c) >= tol::kPrune) min_abs = std::min(min_abs, std::abs(c));
  }
  if (!std::isfinite(min_abs)) throw DomainError("substitution cancelled every term");
  result.scale = plan.expand_partners ? min_abs : 1.0;
  InequalityAST ast;
  for (const auto& [m, c] : collected) {
    if (std::abs(c) < tol::kPrune) continue;
    const double v = c / result.scale;
    const Rational r = Rational::approximate(v, 1000);
    if (std::abs(r.to_double() - v) > 1e-9 * std::max(1.0, std::abs(v))) {
      throw DomainError("coefficient ratio " + format_number(v) + " is not a small rational");
    }
    ast.linear.push_back({r, m});
  }
  result.expression = canonicalize(ast);
  return result;
}

ImageCache images_for(const std::vector<WorkTerm>& terms, const SubstitutionPlan& plan, int workers) {
  ImageCache cache;
  for (const auto& [sym, count] : occurrences(terms, plan.target_site)) {
    (void)count;
    const Letter l = target_letter(sym, plan.letter_map);
    if (!cache.count(l)) cache.emplace(l, image_set(plan.encoding, l, workers));
  }
  return cache;
}

void check_width(int seed_width, const LogicalEncoding& enc) {
  if (seed_width + enc.width() - 1 > kMaxDescendantWidth) {
    throw CapacityError("descendant would have " + std::to_string(seed_width + enc.width() - 1) +
                        " sites; the limit is " + std::to_string(kMaxDescendantWidth));
  }
}

}  // namespace

Substitution substitute(const InequalityAST& seed, const SubstitutionPlan& plan) {
  check_width(seed.max_site(), plan.encoding);
  const auto terms = prepare(seed, plan);
  return substitute_prepared(terms, plan, images_for(terms, plan, 1), seed.max_site());
}

StateVector lift_state(const StateVector& seed_state, int target_site, const LogicalEncoding& enc) {
  const int w = seed_state.width();
  const int n = enc.width();
  if (target_site < 1 || target_site > w) throw DimensionError("target site outside the seed state");
  const int width = w + n - 1;
  if (width > kMaxWidth) throw CapacityError("lifted state too wide");
  const int suffix_bits = w - target_site;
  const std::uint32_t suffix_mask = (1u << suffix_bits) - 1;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(Eigen::Index{1} << width);
  const Eigen::VectorXcd* code[2] = {&enc.zero().amplitudes(), &enc.one().amplitudes()};
  for (std::uint32_t j = 0; j < seed_state.dim(); ++j) {
    const Complex a = seed_state.amplitude(j);
    if (std::abs(a) == 0.0) continue;
    const std::uint32_t bit = (j >> suffix_bits) & 1u;
    const std::uint32_t prefix = j >> (suffix_bits + 1);
    const std::uint32_t suffix = j & suffix_mask;
    const Eigen::VectorXcd& v = *code[bit];
    for (Eigen::Index c = 0; c < v.size(); ++c) {
      if (std::abs(v(c)) == 0.0) continue;
      const std::uint32_t idx = (prefix << (n + suffix_bits)) | (static_cast<std::uint32_t>(c) << suffix_bits) | suffix;
      out(idx) += a * v(c);
    }
  }
  return StateVector(width, out);
}

Assignment realize_seed(const InequalityAST& seed, int target_site, const std::map<SettingSymbol, Letter>& letter_map,
                        const StateVector& seed_state, std::uint64_t rng_seed, int workers) {
  SeesawOptions opts;
  opts.fixed_state = seed_state;
  opts.seed = rng_seed;
  opts.workers = workers;
  bool any_free = false;
  for (const auto& s : seed.settings()) {
    if (s.site == target_site && !s.is_fixed_pauli()) {
      opts.pinned[s] = LocalObservable::pauli(target_letter(s, letter_map));
    } else if (!s.is_fixed_pauli()) {
      any_free = true;
    }
  }
  if (!any_free) return opts.pinned;
  const SeesawResult up = seesaw_max(seed, opts);
  opts.minimize = true;
  const SeesawResult down = seesaw_max(seed, opts);
  const SeesawResult& best = (-down.value > up.value + 1e-9) ? down : up;
  Assignment out = best.assignment;
  for (auto it = out.begin(); it != out.end();) {
    it = it->first.is_fixed_pauli() ? out.erase(it) : std::next(it);
  }
  return out;
}

nlohmann::json DescendantResult::to_json(bool include_state) const {
  nlohmann::json j;
  j["name"] = descendant.name;
  j["expression"] = format_expression(descendant.ast);
  j["lhv_bound"] = lhv_bound;
  j["quantum_value"] = quantum_value;
  j["violation_ratio"] = std::isfinite(violation_ratio) ? nlohmann::json(violation_ratio) : nlohmann::json(nullptr);
  j["accepted"] = accepted;
  j["realization"] = format_assignment(realization);
  nlohmann::json c = nlohmann::json::object();
  for (const auto& [s, v] : choices) c[s.str()] = v;
  j["choices"] = c;
  if (include_state) j["quantum_state"] = quantum_state.to_json();
  return j;
}

nlohmann::json DescendReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed_name;
  j["target_site"] = target_site;
  j["encoding"] = encoding;
  j["mode"] = to_string(mode);
  j["candidates"] = candidates;
  j["total"] = total;
  j["truncated"] = truncated;
  j["seed_realization"] = format_assignment(seed_realization);
  j["results"] = nlohmann::json::array();
  for (const auto& r : results) j["results"].push_back(r.to_json());
  return j;
}

namespace {

// All injective sequences of `length` indices drawn from [0, k), in lexicographic order.
std::vector<std::vector<int>> injective_sequences(int k, int length, std::uint64_t cap) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  auto rec = [&](auto&& self) -> void {
    if (out.size() >= cap) return;
    if (static_cast<int>(cur.size()) == length) {
      out.push_back(cur);
      return;
    }
    for (int i = 0; i < k; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      used[static_cast<std::size_t>(i)] = true;
      cur.push_back(i);
      self(self);
      cur.pop_back();
      used[static_cast<std::size_t>(i)] = false;
    }
  };
  rec(rec);
  return out;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t falling_factorial(int k, int length) {
  std::uint64_t v = 1;
  for (int i = 0; i < length; ++i) v = saturating_mul(v, static_cast<std::uint64_t>(k - i));
  return v;
}

}  // namespace

DescendReport enumerate_descendants(const Inequality& seed, int target_site, const LogicalEncoding& enc,
                                    const std::map<SettingSymbol, Letter>& letter_map,
                                    const DescendOptions& options) {
  const int seed_width = seed.ast.max_site();
  check_width(seed_width, enc);
  if (options.cap == 0) throw DomainError("assignment cap must be positive");
  const StateVector seed_state = options.seed_state ? *options.seed_state : StateVector::ghz(seed_width);
  if (seed_state.width() != seed_width) throw DimensionError("seed state width differs from the seed expression");

  DescendReport report;
  report.seed_name = seed.name;
  report.target_site = target_site;
  report.encoding = enc.label();
  report.mode = options.mode;
  report.seed_realization = realize_seed(seed.ast, target_site, letter_map, seed_state, options.rng_seed,
                                         options.workers);

  SubstitutionPlan plan;
  plan.target_site = target_site;
  plan.encoding = enc;
  plan.letter_map = letter_map;
  plan.mode = options.mode;
  plan.expand_partners = options.expand_partners;
  plan.partner_realization = report.seed_realization;
  const auto terms = prepare(seed.ast, plan);
  const ImageCache images = images_for(terms, plan, options.workers);
  const auto occ = occurrences(terms, target_site);
  const StateVector lifted = lift_state(seed_state, target_site, enc);

  // Choice options per logical setting, combined in mixed radix.
  std::vector<std::vector<std::vector<int>>> per_setting;
  report.total = 1;
  for (const auto& [sym, count] : occ) {
    const int k = static_cast<int>(images.at(target_letter(sym, letter_map)).members.size());
    switch (options.mode) {
      case SubstitutionMode::AllImages:
        per_setting.push_back({{}});
        break;
      case SubstitutionMode::Uniform: {
        std::vector<std::vector<int>> o;
        for (int i = 0; i < k; ++i) o.push_back({i});
        per_setting.push_back(o);
        report.total = saturating_mul(report.total, static_cast<std::uint64_t>(k));
        break;
      }
      case SubstitutionMode::PerOccurrence:
        if (count > k) {
          throw DomainError(sym.str() + " occurs " + std::to_string(count) + " times but has only " +
                            std::to_string(k) + " images");
        }
        per_setting.push_back(injective_sequences(k, count, options.cap));
        report.total = saturating_mul(report.total, falling_factorial(k, count));
        break;
    }
  }
  report.candidates = std::min(report.total, options.cap);
  report.truncated = report.total > options.cap;

  std::vector<std::optional<DescendantResult>> slots(static_cast<std::size_t>(report.candidates));
  parallel_for(slots.size(), options.workers, [&](std::size_t index) {
    SubstitutionPlan p = plan;
    std::size_t rem = index;
    for (std::size_t s = per_setting.size(); s-- > 0;) {
      const auto& opts = per_setting[s];
      p.choices[occ[s].first] = opts[rem % opts.size()];
      rem /= opts.size();
    }
    Substitution sub;
    try {
      sub = substitute_prepared(terms, p, images, seed_width);
    } catch (const DomainError&) {
      return;  // e.g. every term cancelled or an irrational coefficient ratio
    }
    DescendantResult r;
    r.descendant.ast = sub.expression;
    r.realization = sub.realization;
    r.choices = options.mode == SubstitutionMode::AllImages ? decltype(p.choices){} : p.choices;
    const LhvResult lhv = lhv_enumerate(sub.expression, 1);
    r.lhv_bound = std::max(lhv.max.to_double(), -lhv.min.to_double());
    r.quantum_state = lifted;
    r.quantum_value = std::abs(quantum_value(sub.expression, sub.realization, lifted));
    r.violation_ratio = r.lhv_bound > tol::kPrune ? r.quantum_value / r.lhv_bound
                                                  : std::numeric_limits<double>::infinity();
    r.accepted = r.quantum_value > r.lhv_bound + tol::kViolation;
    slots[index] = std::move(r);
  });

  std::set<std::string> seen;
  for (auto& s : slots) {
    if (!s) continue;
    const std::string text = format_expression(s->descendant.ast);
    if (!seen.insert(text).second) continue;
    report.results.push_back(std::move(*s));
  }
  std::stable_sort(report.results.begin(), report.results.end(), [](const auto& a, const auto& b) {
    if (a.violation_ratio != b.violation_ratio) return a.violation_ratio > b.violation_ratio;
    return format_expression(a.descendant.ast) < format_expression(b.descendant.ast);
  });
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    auto& d = report.results[i].descendant;
    d.name = (seed.name.empty() ? std::string("seed") : seed.name) + "-site" + std::to_string(target_site) + "-" +
             enc.label() + "-" + std::to_string(i + 1);
    d.provenance = "descendant of " + (seed.name.empty() ? std::string("seed") : seed.name) + " on site " +
                   std::to_string(target_site) + " via " + enc.label() + " (" + to_string(options.mode) + ")";
  }
  return report;
}

LiftedWitness lift_coherence_witness(double threshold, Letter letter, const LogicalEncoding& enc) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("threshold must lie in (0, 1]");
  if (letter != Letter::X && letter != Letter::Y) throw DomainError("coherence witnesses use X or Y");
  const ImageSet images = image_set(enc, letter);
  if (images.members.empty()) throw DomainError("empty image set");
  LiftedWitness out;
  out.image_count = images.members.size();
  out.bound = static_cast<double>(out.image_count) * threshold;
  InequalityAST ast;
  PauliSum op(enc.width());
  for (const auto& m : images.members) {
    Monomial mono;
    for (int k = 0; k < enc.width(); ++k) {
      const Letter l = m.string().letter(k);
      if (l != Letter::I) mono.push_back(SettingSymbol{k + 1, letter_char(l), 0});
    }
    ast.linear.push_back({Rational(static_cast<std::int64_t>(m.coefficient())), mono});
    op.add(m.coefficient(), m.string());
  }
  ast.bound = Rational::approximate(out.bound);
  out.witness.ast = canonicalize(ast);
  out.witness.name = std::string("coherence-") + letter_char(letter) + "-" + enc.label();
  out.witness.provenance = "lifted coherence witness <" + std::string(1, letter_char(letter)) +
                           "> <= " + format_number(threshold);
  out.lhv_bound = lhv_enumerate(out.witness.ast).max.to_double();
  if (enc.width() >= 2) {
    std::vector<int> rest(static_cast<std::size_t>(enc.width() - 1));
    std::iota(rest.begin(), rest.end(), 2);
    out.separable_bound = separable_bound(op, {{1}, rest}).value;
  } else {
    out.separable_bound = max_eigenvalue(op.to_matrix());
  }
  const double r = 1.0 / std::sqrt(2.0);
  out.lifted_state = StateVector(enc.width(), enc.encode(r, r));
  out.quantum_value = expectation(out.lifted_state, op);
  return out;
}

}  // namespace stabhom
