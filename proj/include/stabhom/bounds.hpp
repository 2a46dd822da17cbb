#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "stabhom/ineq.hpp"
#include "stabhom/statevec.hpp"

namespace stabhom {

inline constexpr int kMaxLhvSettings = 24;
inline constexpr int kMaxNonlinearSettings = 20;
inline constexpr int kMaxSeesawSites = 6;

// Which side of an expression a bound constrains. Lower-sense quantities are
// reported as magnitudes of the negated expression; two-sided ones as |value|.
enum class Sense { Upper, Lower, TwoSided };

std::string to_string(Sense s);
Sense sense_from_string(const std::string& s);
// Oriented value of an interval [lo, hi] of attainable values.
double oriented(Sense s, double lo, double hi);

struct DeterministicStrategy {
  std::map<SettingSymbol, int> assignment;  // each value is +1 or -1
  nlohmann::json to_json() const;
};

struct LhvResult {
  Rational max;
  Rational min;
  DeterministicStrategy argmax;
  DeterministicStrategy argmin;
  std::uint64_t strategies = 0;
};

// Exact extremes of a linear expression over all deterministic +/-1 strategies.
LhvResult lhv_enumerate(const InequalityAST& ast, int workers = 0);
double lhv_bound(const InequalityAST& ast, int workers = 0);

struct MixtureComponent {
  double weight;
  DeterministicStrategy strategy;
};

struct NonlinearLhvResult {
  double max = 0.0;
  double min = 0.0;
  std::vector<MixtureComponent> argmax;  // mixture attaining max
  DeterministicStrategy argmin;          // the minimum sits at a deterministic point
  std::size_t distinct_points = 0;
};

// Extremes over mixtures of deterministic strategies of
//   E[linear] + sum_j c_j (E[inner_j])^2,  all c_j <= 0, at most two squares.
NonlinearLhvResult lhv_bound_nonlinear(const InequalityAST& ast, int workers = 0);

struct HybridResult {
  double value = 0.0;
  std::vector<int> side_a;  // sites on one side of the best bipartition
  std::vector<int> side_b;
};

// Maximum over bipartitions of the party groups of the bilocal bound, where each
// side may return arbitrary +/-1 outcomes as a function of all of its settings.
// With singleton groups on two sites this reduces to the LHV bound.
HybridResult hybrid_bound(const InequalityAST& ast, const std::vector<std::vector<int>>& groups);

struct SeparableOptions {
  int restarts = 64;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;
  int max_sweeps = 5000;
  int workers = 0;
};

struct SeparableResult {
  double value = 0.0;
  std::vector<std::vector<int>> parties;
  std::vector<Eigen::VectorXcd> party_states;
  StateVector product_state;
};

// Heuristic maximum of a linear operator over pure product states of the given
// parties (1-based site groups that partition all sites). The returned value is
// attained by the certificate, so it is a certified lower bound on the true max.
SeparableResult separable_bound(const PauliSum& op, const std::vector<std::vector<int>>& parties,
                                const SeparableOptions& options = {});

struct SeesawOptions {
  int restarts = 32;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  int max_iterations = 1000;
  int workers = 0;
  std::optional<StateVector> fixed_state;
  Assignment pinned;  // settings excluded from optimization
  bool minimize = false;
};

struct SeesawResult {
  double value = 0.0;
  Assignment assignment;
  StateVector state;
};

// Alternating optimization over qubit observables (unit Bloch vectors) and, unless
// a fixed state is given, the state. Linear expressions only.
SeesawResult seesaw_max(const InequalityAST& ast, const SeesawOptions& options = {});

double quantum_value(const InequalityAST& ast, const Assignment& assignment, const StateVector& state);

struct QuantumExtremes {
  double max = 0.0;
  double min = 0.0;
  StateVector argmax;
  StateVector argmin;
  bool heuristic = false;  // true when square terms forced a local search
};

QuantumExtremes quantum_extremes(const InequalityAST& ast, const Assignment& assignment, std::uint64_t seed = 0);
double quantum_max(const InequalityAST& ast, const Assignment& assignment);

struct AlgebraicBound {
  double max = 0.0;
  double min = 0.0;
};

// Ceiling from sum |c| of monomials (each a product of unit-norm observables)
// plus the largest possible contribution of each square.
AlgebraicBound algebraic_bound(const InequalityAST& ast);

struct DiscordCheck {
  double x_correlator = 0.0;
  double y_correlator = 0.0;
  bool pass = false;
  bool degenerate = false;  // reduced state of qubit 1 had no preferred axis
  std::array<double, 3> axis{0, 0, 1};
};

// Correlator condition for zero discord on a two-qubit state. The frame is
// adapted to the reduced state of qubit 1; the reported correlators are the
// largest values of <X1' (x) M> and <Y1' (x) M> over second-qubit observables M.
DiscordCheck discord_condition_check(const DensityOperator& rho, double epsilon);

}  // namespace stabhom
