#include "stabhom/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "stabhom/errors.hpp"
#include "stabhom/parallel.hpp"
#include "stabhom/tolerances.hpp"

namespace stabhom {

std::string to_string(Sense s) {
  switch (s) {
    case Sense::Upper: return "upper";
    case Sense::Lower: return "lower";
    case Sense::TwoSided: return "two-sided";
  }
  return "upper";
}

Sense sense_from_string(const std::string& s) {
  if (s == "upper") return Sense::Upper;
  if (s == "lower") return Sense::Lower;
  if (s == "two-sided") return Sense::TwoSided;
  throw DomainError("unknown sense '" + s + "' (expected upper, lower or two-sided)");
}

double oriented(Sense s, double lo, double hi) {
  switch (s) {
    case Sense::Upper: return hi;
    case Sense::Lower: return -lo;
    case Sense::TwoSided: return std::max(hi, -lo);
  }
  return hi;
}

nlohmann::json DeterministicStrategy::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [s, v] : assignment) j[s.str()] = v;
  return j;
}

// ---------------------------------------------------------------------------
// Strategy enumeration

namespace {

// Integer-scaled linear form over +/-1 variables: value = sum_t coef_t * prod_{i in mask_t} s_i,
// and the true value is value / den.
struct IntForm {
  std::vector<std::uint32_t> masks;
  std::vector<std::int64_t> coefs;
  std::int64_t den = 1;

  double real(std::int64_t v) const { return static_cast<double>(v) / static_cast<double>(den); }
};

struct Space {
  std::vector<SettingSymbol> symbols;
  std::map<SettingSymbol, int> index;

  explicit Space(const std::set<SettingSymbol>& settings) : symbols(settings.begin(), settings.end()) {
    for (std::size_t i = 0; i < symbols.size(); ++i) index[symbols[i]] = static_cast<int>(i);
  }
  int size() const { return static_cast<int>(symbols.size()); }

  DeterministicStrategy strategy(std::uint32_t bits) const {
    DeterministicStrategy s;
    for (std::size_t i = 0; i < symbols.size(); ++i) s.assignment[symbols[i]] = ((bits >> i) & 1u) ? -1 : 1;
    return s;
  }
};

IntForm make_form(const std::vector<LinearTerm>& terms, const Space& space) {
  IntForm f;
  for (const auto& t : terms) f.den = lcm_checked(f.den, t.coefficient.den());
  for (const auto& t : terms) {
    std::uint32_t mask = 0;
    for (const auto& s : t.monomial) mask |= 1u << space.index.at(s);
    const Rational scaled = t.coefficient * Rational(f.den);
    f.masks.push_back(mask);
    f.coefs.push_back(scaled.num());
  }
  return f;
}

// Visits every strategy whose top `prefix_bits` bits equal `prefix`, in Gray-code
// order, passing the current bit pattern and the integer value of every form.
template <class Visit>
void enumerate_chunk(int n_settings, int prefix_bits, std::uint32_t prefix, const std::vector<IntForm>& forms,
                     Visit&& visit) {
  const int free_bits = n_settings - prefix_bits;
  std::uint32_t bits = prefix << free_bits;
  std::vector<std::int64_t> values(forms.size(), 0);
  std::vector<std::vector<std::int8_t>> signs(forms.size());
  std::vector<std::vector<std::vector<std::uint32_t>>> touching(forms.size());
  for (std::size_t f = 0; f < forms.size(); ++f) {
    const auto& form = forms[f];
    signs[f].resize(form.masks.size());
    touching[f].resize(static_cast<std::size_t>(std::max(free_bits, 0)));
    for (std::size_t t = 0; t < form.masks.size(); ++t) {
      const int s = (std::popcount(form.masks[t] & bits) % 2) ? -1 : 1;
      signs[f][t] = static_cast<std::int8_t>(s);
      values[f] += s * form.coefs[t];
      for (int b = 0; b < free_bits; ++b) {
        if (form.masks[t] & (1u << b)) touching[f][b].push_back(static_cast<std::uint32_t>(t));
      }
    }
  }
  visit(bits, values);
  const std::uint64_t count = std::uint64_t{1} << free_bits;
  for (std::uint64_t k = 1; k < count; ++k) {
    const int b = std::countr_zero(k);
    bits ^= 1u << b;
    for (std::size_t f = 0; f < forms.size(); ++f) {
      for (std::uint32_t t : touching[f][b]) {
        values[f] -= 2 * signs[f][t] * forms[f].coefs[t];
        signs[f][t] = static_cast<std::int8_t>(-signs[f][t]);
      }
    }
    visit(bits, values);
  }
}

int prefix_bits_for(int n_settings, int workers) {
  if (workers <= 0) workers = default_workers();
  if (workers <= 1 || n_settings < 12) return 0;
  int p = 0;
  while ((1 << p) < 4 * workers && p < n_settings) ++p;
  return p;
}

template <class Visit, class Merge>
void enumerate_all(int n_settings, const std::vector<IntForm>& forms, int workers, Visit make_visitor,
                   Merge merge) {
  const int prefix = prefix_bits_for(n_settings, workers);
  const std::size_t chunks = std::size_t{1} << prefix;
  using Visitor = decltype(make_visitor());
  std::vector<Visitor> partial(chunks, make_visitor());
  parallel_for(chunks, workers, [&](std::size_t c) {
    enumerate_chunk(n_settings, prefix, static_cast<std::uint32_t>(c), forms,
                    [&](std::uint32_t bits, const std::vector<std::int64_t>& v) { partial[c](bits, v); });
  });
  for (auto& p : partial) merge(p);
}

struct Extremes {
  std::int64_t max = std::numeric_limits<std::int64_t>::min();
  std::int64_t min = std::numeric_limits<std::int64_t>::max();
  std::uint32_t argmax = 0;
  std::uint32_t argmin = 0;

  void operator()(std::uint32_t bits, const std::vector<std::int64_t>& v) { take(v[0], bits, v[0], bits); }
  void take(std::int64_t hi, std::uint32_t hi_bits, std::int64_t lo, std::uint32_t lo_bits) {
    if (hi > max || (hi == max && hi_bits < argmax)) {
      max = hi;
      argmax = hi_bits;
    }
    if (lo < min || (lo == min && lo_bits < argmin)) {
      min = lo;
      argmin = lo_bits;
    }
  }
};

void require_capacity(int n, int cap, const char* what) {
  if (n > cap) {
    throw CapacityError(std::string(what) + " supports at most " + std::to_string(cap) + " settings, got " +
                        std::to_string(n));
  }
}

}  // namespace

LhvResult lhv_enumerate(const InequalityAST& ast, int workers) {
  if (!ast.is_linear()) throw DomainError("expression has square terms; use lhv_bound_nonlinear");
  const Space space(ast.settings());
  require_capacity(space.size(), kMaxLhvSettings, "LHV enumeration");
  const std::vector<IntForm> forms{make_form(ast.linear, space)};
  Extremes best;
  enumerate_all(
      space.size(), forms, workers, [] { return Extremes{}; },
      [&](const Extremes& e) { best.take(e.max, e.argmax, e.min, e.argmin); });
  LhvResult out;
  out.max = Rational(best.max, forms[0].den);
  out.min = Rational(best.min, forms[0].den);
  out.argmax = space.strategy(best.argmax);
  out.argmin = space.strategy(best.argmin);
  out.strategies = std::uint64_t{1} << space.size();
  return out;
}

double lhv_bound(const InequalityAST& ast, int workers) { return lhv_enumerate(ast, workers).max.to_double(); }

// ---------------------------------------------------------------------------
// Nonlinear LHV bound

namespace {

struct Point {
  std::int64_t l;
  std::uint32_t bits;
};

struct PointCollector {
  std::map<std::vector<std::int64_t>, Point> best;  // key: scaled square inners
  const std::vector<double>* coeffs = nullptr;      // square coefficients
  const std::vector<IntForm>* forms = nullptr;
  double min_value = std::numeric_limits<double>::infinity();
  std::uint32_t min_bits = 0;

  void operator()(std::uint32_t bits, const std::vector<std::int64_t>& v) {
    std::vector<std::int64_t> key(v.begin() + 1, v.end());
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(std::move(key), Point{v[0], bits});
    } else if (v[0] > it->second.l || (v[0] == it->second.l && bits < it->second.bits)) {
      it->second = {v[0], bits};
    }
    double f = (*forms)[0].real(v[0]);
    for (std::size_t j = 0; j < coeffs->size(); ++j) {
      const double m = (*forms)[j + 1].real(v[j + 1]);
      f += (*coeffs)[j] * m * m;
    }
    if (f < min_value || (f == min_value && bits < min_bits)) {
      min_value = f;
      min_bits = bits;
    }
  }
};

struct RealPoint {
  std::vector<double> m;
  double l;
  std::uint32_t bits;
};

double objective(const std::vector<double>& c, const std::vector<double>& m, double l) {
  double f = l;
  for (std::size_t j = 0; j < c.size(); ++j) f += c[j] * m[j] * m[j];
  return f;
}

}  // namespace

NonlinearLhvResult lhv_bound_nonlinear(const InequalityAST& ast, int workers) {
  if (ast.is_linear()) {
    const LhvResult r = lhv_enumerate(ast, workers);
    NonlinearLhvResult out;
    out.max = r.max.to_double();
    out.min = r.min.to_double();
    out.argmax = {{1.0, r.argmax}};
    out.argmin = r.argmin;
    out.distinct_points = 1;
    return out;
  }
  if (ast.squares.size() > 2) throw DomainError("at most two square terms are supported");
  std::vector<double> coeffs;
  for (const auto& sq : ast.squares) {
    if (sq.coefficient.sign() > 0) {
      throw DomainError("square coefficient " + sq.coefficient.str() + " is positive; the objective is not concave");
    }
    coeffs.push_back(sq.coefficient.to_double());
  }
  const Space space(ast.settings());
  require_capacity(space.size(), kMaxNonlinearSettings, "nonlinear LHV bound");
  std::vector<IntForm> forms{make_form(ast.linear, space)};
  for (const auto& sq : ast.squares) forms.push_back(make_form(sq.inner, space));

  PointCollector merged;
  merged.coeffs = &coeffs;
  merged.forms = &forms;
  enumerate_all(
      space.size(), forms, workers,
      [&] {
        PointCollector c;
        c.coeffs = &coeffs;
        c.forms = &forms;
        return c;
      },
      [&](const PointCollector& c) {
        for (const auto& [key, p] : c.best) {
          auto it = merged.best.find(key);
          if (it == merged.best.end() || p.l > it->second.l || (p.l == it->second.l && p.bits < it->second.bits)) {
            merged.best[key] = p;
          }
        }
        if (c.min_value < merged.min_value || (c.min_value == merged.min_value && c.min_bits < merged.min_bits)) {
          merged.min_value = c.min_value;
          merged.min_bits = c.min_bits;
        }
      });

  NonlinearLhvResult out;
  out.min = merged.min_value;
  out.argmin = space.strategy(merged.min_bits);
  out.distinct_points = merged.best.size();

  std::vector<RealPoint> pts;
  for (const auto& [key, p] : merged.best) {
    RealPoint r{{}, forms[0].real(p.l), p.bits};
    for (std::size_t j = 0; j < key.size(); ++j) r.m.push_back(forms[j + 1].real(key[j]));
    pts.push_back(std::move(r));
  }

  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, std::size_t>> best_mix;
  auto consider = [&](double f, std::vector<std::pair<double, std::size_t>> mix) {
    if (f > best + 1e-12) {
      best = f;
      best_mix = std::move(mix);
    }
  };

  if (coeffs.size() == 1) {
    // Upper concave envelope of (m, L) followed by a closed-form search per segment.
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pts[a].m[0] < pts[b].m[0]; });
    std::vector<std::size_t> hull;
    auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
      return (pts[a].m[0] - pts[o].m[0]) * (pts[b].l - pts[o].l) - (pts[a].l - pts[o].l) * (pts[b].m[0] - pts[o].m[0]);
    };
    for (std::size_t idx : order) {
      while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), idx) >= 0) hull.pop_back();
      hull.push_back(idx);
    }
    const double c = coeffs[0];
    for (std::size_t k = 0; k < hull.size(); ++k) {
      const auto& a = pts[hull[k]];
      consider(objective(coeffs, a.m, a.l), {{1.0, hull[k]}});
      if (k + 1 == hull.size()) continue;
      const auto& b = pts[hull[k + 1]];
      const double dm = b.m[0] - a.m[0], dl = b.l - a.l;
      if (c == 0.0 || dm == 0.0) continue;
      double lam = -(dl + 2.0 * c * dm * a.m[0]) / (2.0 * c * dm * dm);
      lam = std::clamp(lam, 0.0, 1.0);
      const double m = a.m[0] + lam * dm, l = a.l + lam * dl;
      consider(l + c * m * m, {{1.0 - lam, hull[k]}, {lam, hull[k + 1]}});
    }
  } else {
    // Two squares: the optimum mixes at most three distinct points; scan vertices,
    // edges and triangles of the projected point set.
    if (pts.size() > 300) throw CapacityError("too many distinct projected points for the two-square bound");
    const std::size_t n = pts.size();
    for (std::size_t a = 0; a < n; ++a) consider(objective(coeffs, pts[a].m, pts[a].l), {{1.0, a}});
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double d1 = pts[b].m[0] - pts[a].m[0], d2 = pts[b].m[1] - pts[a].m[1], dl = pts[b].l - pts[a].l;
        const double qa = coeffs[0] * d1 * d1 + coeffs[1] * d2 * d2;
        const double qb = dl + 2.0 * coeffs[0] * pts[a].m[0] * d1 + 2.0 * coeffs[1] * pts[a].m[1] * d2;
        if (qa >= 0.0) continue;
        const double lam = std::clamp(-qb / (2.0 * qa), 0.0, 1.0);
        const std::vector<double> m{pts[a].m[0] + lam * d1, pts[a].m[1] + lam * d2};
        consider(objective(coeffs, m, pts[a].l + lam * dl), {{1.0 - lam, a}, {lam, b}});
      }
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        for (std::size_t e = b + 1; e < n; ++e) {
          const double u1[3] = {pts[b].m[0] - pts[a].m[0], pts[b].m[1] - pts[a].m[1], pts[b].l - pts[a].l};
          const double u2[3] = {pts[e].m[0] - pts[a].m[0], pts[e].m[1] - pts[a].m[1], pts[e].l - pts[a].l};
          const double* d[2] = {u1, u2};
          double A[2][2], rhs[2];
          for (int i = 0; i < 2; ++i) {
            for (int k = 0; k < 2; ++k) {
              A[i][k] = 2.0 * coeffs[0] * d[i][0] * d[k][0] + 2.0 * coeffs[1] * d[i][1] * d[k][1];
            }
            rhs[i] = -(d[i][2] + 2.0 * coeffs[0] * pts[a].m[0] * d[i][0] + 2.0 * coeffs[1] * pts[a].m[1] * d[i][1]);
          }
          const double det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
          if (std::abs(det) < 1e-12) continue;
          const double l1 = (rhs[0] * A[1][1] - A[0][1] * rhs[1]) / det;
          const double l2 = (A[0][0] * rhs[1] - A[1][0] * rhs[0]) / det;
          if (l1 < 0.0 || l2 < 0.0 || l1 + l2 > 1.0) continue;
          const std::vector<double> m{pts[a].m[0] + l1 * u1[0] + l2 * u2[0], pts[a].m[1] + l1 * u1[1] + l2 * u2[1]};
          const double l = pts[a].l + l1 * u1[2] + l2 * u2[2];
          consider(objective(coeffs, m, l), {{1.0 - l1 - l2, a}, {l1, b}, {l2, e}});
        }
      }
    }
  }
  out.max = best;
  for (const auto& [w, idx] : best_mix) {
    if (w > 0.0) out.argmax.push_back({w, space.strategy(pts[idx].bits)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hybrid (bilocal) bound

namespace {

double bilocal_bound(const InequalityAST& ast, const std::set<int>& side_a) {
  // Each term splits into a tuple of side-A settings and a tuple of side-B settings.
  std::map<Monomial, int> a_index, b_index;
  struct Entry {
    int a, b;
    double c;
  };
  std::vector<Entry> entries;
  for (const auto& t : ast.linear) {
    Monomial ma, mb;
    for (const auto& s : t.monomial) (side_a.count(s.site) ? ma : mb).push_back(s);
    const int ia = a_index.emplace(ma, static_cast<int>(a_index.size())).first->second;
    const int ib = b_index.emplace(mb, static_cast<int>(b_index.size())).first->second;
    entries.push_back({ia, ib, t.coefficient.to_double()});
  }
  bool swap_sides = a_index.size() > b_index.size();
  const auto& enum_index = swap_sides ? b_index : a_index;
  const auto& free_index = swap_sides ? a_index : b_index;
  const std::size_t n_enum = enum_index.size();
  if (n_enum > 24) throw CapacityError("hybrid bound needs at most 24 setting tuples on the smaller side");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_enum),
                                            static_cast<Eigen::Index>(free_index.size()));
  for (const auto& e : entries) {
    const int r = swap_sides ? e.b : e.a;
    const int col = swap_sides ? e.a : e.b;
    C(r, col) += e.c;
  }
  // The empty tuple has outcome +1 on its side; every other tuple is free.
  const auto enum_empty = enum_index.find(Monomial{});
  const auto free_empty = free_index.find(Monomial{});
  const int fixed_row = enum_empty == enum_index.end() ? -1 : enum_empty->second;
  const int fixed_col = free_empty == free_index.end() ? -1 : free_empty->second;
  double best = -std::numeric_limits<double>::infinity();
  const std::uint64_t count = std::uint64_t{1} << n_enum;
  Eigen::VectorXd u(static_cast<Eigen::Index>(n_enum));
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    if (fixed_row >= 0 && ((bits >> fixed_row) & 1u)) continue;
    for (std::size_t r = 0; r < n_enum; ++r) u(static_cast<Eigen::Index>(r)) = ((bits >> r) & 1u) ? -1.0 : 1.0;
    const Eigen::VectorXd col_sums = C.transpose() * u;
    double v = 0.0;
    for (Eigen::Index k = 0; k < col_sums.size(); ++k) v += (k == fixed_col) ? col_sums(k) : std::abs(col_sums(k));
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

HybridResult hybrid_bound(const InequalityAST& ast, const std::vector<std::vector<int>>& groups) {
  if (!ast.is_linear()) throw DomainError("hybrid bounds need a linear expression");
  if (groups.size() < 2) throw DomainError("hybrid bounds need at least two party groups");
  std::set<int> covered;
  for (const auto& g : groups) {
    for (int s : g) {
      if (!covered.insert(s).second) throw DomainError("site " + std::to_string(s) + " appears in two groups");
    }
  }
  for (const auto& s : ast.settings()) {
    if (!covered.count(s.site)) throw DomainError("site " + std::to_string(s.site) + " is not in any group");
  }
  if (groups.size() > 16) throw CapacityError("too many party groups");
  HybridResult out;
  out.value = -std::numeric_limits<double>::infinity();
  const std::uint32_t count = 1u << (groups.size() - 1);
  // Group 0 always sits on side A; masks range over the other groups.
  for (std::uint32_t mask = 0; mask + 1 < count; ++mask) {
    std::set<int> side_a(groups[0].begin(), groups[0].end());
    for (std::size_t g = 1; g < groups.size(); ++g) {
      if ((mask >> (g - 1)) & 1u) side_a.insert(groups[g].begin(), groups[g].end());
    }
    const double v = bilocal_bound(ast, side_a);
    if (v > out.value + 1e-12) {
      out.value = v;
      out.side_a.assign(side_a.begin(), side_a.end());
      out.side_b.clear();
      for (int s : covered) {
        if (!side_a.count(s)) out.side_b.push_back(s);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Separable bound

namespace {

// Letters of p on the given 0-based sites, as a string on those sites only.
PauliString restrict_string(const PauliString& p, const std::vector<int>& sites) {
  std::string letters;
  for (int s : sites) letters.push_back(letter_char(p.letter(s)));
  return PauliString::from_letters(letters);
}

double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

Eigen::Vector2cd bloch_ket(double u, double v) {
  // Equal-area map of (u, v) in [0,1)^2 to the sphere.
  const double z = 1.0 - 2.0 * u;
  const double theta = std::acos(std::clamp(z, -1.0, 1.0));
  const double phi = 2.0 * M_PI * v;
  Eigen::Vector2cd k;
  k << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
  return k;
}

}  // namespace

SeparableResult separable_bound(const PauliSum& op, const std::vector<std::vector<int>>& parties,
                                const SeparableOptions& options) {
  const int width = op.width();
  std::vector<std::vector<int>> zero_based;
  std::vector<int> seen(static_cast<std::size_t>(width), 0);
  for (const auto& party : parties) {
    if (party.empty()) throw DomainError("empty party");
    std::vector<int> sites;
    for (int s : party) {
      if (s < 1 || s > width) throw DimensionError("party site " + std::to_string(s) + " outside the operator");
      if (seen[static_cast<std::size_t>(s - 1)]++) throw DomainError("site listed in two parties");
      sites.push_back(s - 1);
    }
    std::sort(sites.begin(), sites.end());
    if (sites.size() > 8) throw CapacityError("parties are limited to 8 qubits");
    zero_based.push_back(sites);
  }
  for (int s = 0; s < width; ++s) {
    if (!seen[static_cast<std::size_t>(s)]) throw DomainError("site " + std::to_string(s + 1) + " is in no party");
  }
  if (zero_based.size() < 2) throw DomainError("a separable bound needs at least two parties");

  const auto terms = op.terms();
  const std::size_t np = zero_based.size();
  // restricted[t][p] is the part of term t acting on party p.
  std::vector<std::vector<PauliString>> restricted(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) {
    for (const auto& sites : zero_based) restricted[t].push_back(restrict_string(terms[t].string(), sites));
  }

  struct Run {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXcd> states;
  };
  const int restarts = std::max(1, options.restarts);
  std::vector<Run> runs(static_cast<std::size_t>(restarts));

  parallel_for(static_cast<std::size_t>(restarts), options.workers, [&](std::size_t r) {
    std::mt19937_64 rng(options.seed * 0x9E3779B97F4A7C15ULL + r);
    std::normal_distribution<double> normal;
    std::vector<Eigen::VectorXcd> states;
    for (std::size_t p = 0; p < np; ++p) {
      // Quasi-random product start; multi-qubit parties also get a seeded perturbation.
      Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
      for (std::size_t q = 0; q < zero_based[p].size(); ++q) {
        const std::uint64_t idx = (r * 16 + p * 4 + q) + 1;
        v = kron(v, bloch_ket(halton(idx, 2), halton(idx, 3)));
      }
      if (zero_based[p].size() > 1) {
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += 0.1 * Complex(normal(rng), normal(rng));
        v.normalize();
      }
      states.push_back(v);
    }
    auto expect_term = [&](std::size_t t, std::size_t p) {
      return states[p].dot(stabhom::apply(restricted[t][p], states[p]));
    };
    double value = -std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      for (std::size_t p = 0; p < np; ++p) {
        const int pw = static_cast<int>(zero_based[p].size());
        PauliSum induced(pw);
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(Eigen::Index{1} << pw, Eigen::Index{1} << pw);
        for (std::size_t t = 0; t < terms.size(); ++t) {
          Complex factor = terms[t].coefficient();
          for (std::size_t q = 0; q < np; ++q) {
            if (q != p) factor *= expect_term(t, q);
          }
          h += factor * to_matrix(restricted[t][p]);
        }
        h = 0.5 * (h + h.adjoint());
        states[p] = top_eigenpair(h).vector;
      }
      Complex total = 0.0;
      for (std::size_t t = 0; t < terms.size(); ++t) {
        Complex f = terms[t].coefficient();
        for (std::size_t q = 0; q < np; ++q) f *= expect_term(t, q);
        total += f;
      }
      const double next = total.real();
      const bool done = std::abs(next - value) < options.tolerance;
      value = next;
      if (done) break;
    }
    runs[r] = {value, states};
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].value > runs[best].value + 1e-12) best = r;
  }
  SeparableResult out;
  out.value = runs[best].value;
  out.parties = parties;
  out.party_states = runs[best].states;
  // Assemble the product state in site order.
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(Eigen::Index{1} << width);
  const std::uint32_t dim = 1u << width;
  for (std::uint32_t j = 0; j < dim; ++j) {
    Complex amp = 1.0;
    for (std::size_t p = 0; p < np; ++p) {
      std::uint32_t local = 0;
      for (int s : zero_based[p]) local = (local << 1) | ((j >> (width - 1 - s)) & 1u);
      amp *= out.party_states[p](local);
    }
    full(j) = amp;
  }
  out.product_state = StateVector::normalized(width, full);
  return out;
}

// ---------------------------------------------------------------------------
// See-saw over qubit observables

namespace {

struct SeesawProblem {
  const InequalityAST* ast;
  int width;
  std::vector<SettingSymbol> free;
  std::map<SettingSymbol, std::vector<LinearTerm>> terms_with;
  Assignment base;  // pinned and fixed-Pauli settings
  double sign;      // +1 maximize, -1 minimize

  double evaluate(const Assignment& a, const Eigen::VectorXcd& psi) const {
    return sign * expectation(psi, realize_terms(ast->linear, a, width));
  }
};

std::array<double, 3> random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  for (;;) {
    std::array<double, 3> v{normal(rng), normal(rng), normal(rng)};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-6) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

bool lexicographically_smaller(const Assignment& a, const Assignment& b) {
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (ia->second.bloch != ib->second.bloch) return ia->second.bloch < ib->second.bloch;
  }
  return false;
}

}  // namespace

SeesawResult seesaw_max(const InequalityAST& ast, const SeesawOptions& options) {
  if (!ast.is_linear()) throw DomainError("see-saw optimization needs a linear expression");
  SeesawProblem prob;
  prob.ast = &ast;
  prob.width = options.fixed_state ? options.fixed_state->width() : std::max(1, ast.max_site());
  if (prob.width < ast.max_site()) throw DimensionError("fixed state is narrower than the expression");
  if (!options.fixed_state && prob.width > kMaxSeesawSites) {
    throw CapacityError("see-saw supports at most " + std::to_string(kMaxSeesawSites) + " sites");
  }
  prob.sign = options.minimize ? -1.0 : 1.0;
  for (const auto& s : ast.settings()) {
    auto pin = options.pinned.find(s);
    if (pin != options.pinned.end()) {
      prob.base[s] = pin->second;
    } else if (s.is_fixed_pauli()) {
      prob.base[s] = LocalObservable::pauli(letter_from_char(s.base));
    } else {
      prob.free.push_back(s);
    }
  }
  for (const auto& t : ast.linear) {
    for (const auto& s : t.monomial) prob.terms_with[s].push_back(t);
  }

  struct Run {
    double value = -std::numeric_limits<double>::infinity();
    Assignment assignment;
    Eigen::VectorXcd state;
  };
  const int restarts = std::max(1, options.restarts);
  std::vector<Run> runs(static_cast<std::size_t>(restarts));

  parallel_for(static_cast<std::size_t>(restarts), options.workers, [&](std::size_t r) {
    std::mt19937_64 rng(options.seed * 0x9E3779B97F4A7C15ULL + r);
    Assignment a = prob.base;
    for (const auto& s : prob.free) {
      if (r == 0) {
        a[s] = LocalObservable::pauli(static_cast<Letter>(1 + std::min(s.primes, 2)));
      } else {
        a[s] = LocalObservable::from_bloch(random_direction(rng));
      }
    }
    Eigen::VectorXcd psi;
    auto refresh_state = [&] {
      if (options.fixed_state) {
        psi = options.fixed_state->amplitudes();
        return;
      }
      const Eigen::MatrixXcd m = prob.sign * realize_terms(ast.linear, a, prob.width).to_matrix();
      psi = top_eigenpair(m).vector;
    };
    refresh_state();
    double value = prob.evaluate(a, psi);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
      for (const auto& s : prob.free) {
        std::array<double, 3> v{0, 0, 0};
        for (int k = 0; k < 3; ++k) {
          Assignment trial = a;
          trial[s] = LocalObservable::pauli(static_cast<Letter>(k + 1));
          v[k] = prob.sign * expectation(psi, realize_terms(prob.terms_with[s], trial, prob.width));
        }
        const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (n > 1e-14) a[s] = LocalObservable::from_bloch(v);
      }
      refresh_state();
      const double next = prob.evaluate(a, psi);
      const bool done = std::abs(next - value) < options.tolerance;
      value = next;
      if (done) break;
    }
    runs[r] = {value, a, psi};
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const bool better = runs[r].value > runs[best].value + 1e-12;
    const bool tie = std::abs(runs[r].value - runs[best].value) <= 1e-12;
    if (better || (tie && lexicographically_smaller(runs[r].assignment, runs[best].assignment))) best = r;
  }
  SeesawResult out;
  out.value = prob.sign * runs[best].value;
  out.assignment = runs[best].assignment;
  out.state = StateVector::normalized(prob.width, runs[best].state);
  return out;
}

// ---------------------------------------------------------------------------
// Quantum values

double quantum_value(const InequalityAST& ast, const Assignment& assignment, const StateVector& state) {
  if (state.width() < ast.max_site()) throw DimensionError("state is narrower than the expression");
  return assign_paulis(ast, assignment, state.width()).value(state.amplitudes());
}

namespace {

// Dense form of an operator expression for repeated evaluation.
struct DenseExpression {
  Eigen::MatrixXcd linear;
  std::vector<std::pair<double, Eigen::MatrixXcd>> squares;

  double value(const Eigen::VectorXcd& psi) const {
    double v = psi.dot(linear * psi).real();
    for (const auto& [c, m] : squares) {
      const double e = psi.dot(m * psi).real();
      v += c * e * e;
    }
    return v;
  }
};

// Projected gradient ascent of sign * f on the unit sphere.
std::pair<double, Eigen::VectorXcd> local_search(const DenseExpression& op, double sign, Eigen::VectorXcd psi) {
  auto f = [&](const Eigen::VectorXcd& v) { return sign * op.value(v); };
  double value = f(psi);
  double step = 0.5;
  for (int iter = 0; iter < 5000 && step > 1e-13; ++iter) {
    Eigen::VectorXcd g = op.linear * psi;
    for (const auto& [c, m] : op.squares) {
      const Eigen::VectorXcd mp = m * psi;
      g += 2.0 * c * psi.dot(mp).real() * mp;
    }
    g *= sign;
    g -= psi.dot(g) * psi;
    if (g.norm() < 1e-13) break;
    Eigen::VectorXcd trial = (psi + step * g).normalized();
    const double tv = f(trial);
    if (tv > value) {
      psi = trial;
      const double gain = tv - value;
      value = tv;
      step *= 1.5;
      if (gain < 1e-15) break;
    } else {
      step *= 0.5;
    }
  }
  return {value, psi};
}

}  // namespace

QuantumExtremes quantum_extremes(const InequalityAST& ast, const Assignment& assignment, std::uint64_t seed) {
  const OperatorExpression op = assign_paulis(ast, assignment);
  const Eigen::MatrixXcd m = op.linear.empty() ? Eigen::MatrixXcd::Zero(Eigen::Index{1} << op.width,
                                                                         Eigen::Index{1} << op.width)
                                               : op.linear.to_matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const Eigen::Index last = m.rows() - 1;
  QuantumExtremes out;
  if (op.is_linear()) {
    out.max = es.eigenvalues()(last);
    out.min = es.eigenvalues()(0);
    out.argmax = StateVector::normalized(op.width, es.eigenvectors().col(last));
    out.argmin = StateVector::normalized(op.width, es.eigenvectors().col(0));
    return out;
  }
  out.heuristic = true;
  DenseExpression dense{m, {}};
  for (const auto& sq : op.squares) dense.squares.emplace_back(sq.coefficient, sq.inner.to_matrix());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (double sign : {1.0, -1.0}) {
    std::vector<Eigen::VectorXcd> starts;
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(m.rows(), 4); ++k) {
      starts.push_back(es.eigenvectors().col(sign > 0 ? last - k : k));
    }
    for (int r = 0; r < 8; ++r) {
      Eigen::VectorXcd v(m.rows());
      for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = Complex(normal(rng), normal(rng));
      starts.push_back(v.normalized());
    }
    double best = -std::numeric_limits<double>::infinity();
    Eigen::VectorXcd arg;
    for (const auto& s : starts) {
      auto [v, psi] = local_search(dense, sign, s);
      if (v > best + 1e-12) {
        best = v;
        arg = psi;
      }
    }
    if (sign > 0) {
      out.max = best;
      out.argmax = StateVector::normalized(op.width, arg);
    } else {
      out.min = -best;
      out.argmin = StateVector::normalized(op.width, arg);
    }
  }
  return out;
}

double quantum_max(const InequalityAST& ast, const Assignment& assignment) {
  return quantum_extremes(ast, assignment).max;
}

AlgebraicBound algebraic_bound(const InequalityAST& ast) {
  double lin = 0.0;
  for (const auto& t : ast.linear) lin += std::abs(t.coefficient.to_double());
  AlgebraicBound out{lin, -lin};
  for (const auto& sq : ast.squares) {
    double inner = 0.0;
    for (const auto& t : sq.inner) inner += std::abs(t.coefficient.to_double());
    const double c = sq.coefficient.to_double();
    if (c > 0) out.max += c * inner * inner;
    if (c < 0) out.min += c * inner * inner;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discord condition

DiscordCheck discord_condition_check(const DensityOperator& rho, double epsilon) {
  if (rho.width() != 2) throw DimensionError("the discord condition is defined for two-qubit states");
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw DomainError("epsilon must lie in (0, 1/2]");
  const Letter letters[3] = {Letter::X, Letter::Y, Letter::Z};
  Eigen::Vector3d r;
  Eigen::Matrix3d T;
  for (int k = 0; k < 3; ++k) {
    r(k) = expectation_density(rho, SignedPauliTerm(1.0, PauliString::single(2, 0, letters[k])));
    for (int l = 0; l < 3; ++l) {
      const PauliString p = multiply(PauliString::single(2, 0, letters[k]), PauliString::single(2, 1, letters[l]));
      T(k, l) = expectation_density(rho, SignedPauliTerm(1.0, p));
    }
  }
  DiscordCheck out;
  Eigen::Vector3d n;
  if (r.norm() > 1e-9) {
    n = r.normalized();
  } else {
    out.degenerate = true;
    if (T.norm() > 1e-12) {
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(T, Eigen::ComputeFullU);
      n = svd.matrixU().col(0);
    } else {
      n = Eigen::Vector3d(0, 0, 1);
    }
    // Deterministic orientation: first nonzero component positive.
    for (int k = 0; k < 3; ++k) {
      if (std::abs(n(k)) > 1e-12) {
        if (n(k) < 0) n = -n;
        break;
      }
    }
  }
  // Transverse pair (e1, e2, n) forming a right-handed frame.
  Eigen::Vector3d helper = std::abs(n(0)) < 0.9 ? Eigen::Vector3d(1, 0, 0) : Eigen::Vector3d(0, 1, 0);
  Eigen::Vector3d e1 = (helper - helper.dot(n) * n).normalized();
  Eigen::Vector3d e2 = n.cross(e1);
  out.axis = {n(0), n(1), n(2)};
  out.x_correlator = (T.transpose() * e1).norm();
  out.y_correlator = (T.transpose() * e2).norm();
  out.pass = out.x_correlator <= epsilon && out.y_correlator <= epsilon;
  return out;
}

}  // namespace stabhom
