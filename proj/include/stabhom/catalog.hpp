#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stabhom/bounds.hpp"
#include "stabhom/ineq.hpp"
#include "stabhom/statevec.hpp"

namespace stabhom {

inline constexpr int kCatalogSchema = 1;

// A numeric or structural statement about a fixture, with its own parameters.
// Kinds: lhv, separable, hybrid, quantum_value, quantum_max, algebraic (numbers);
// derivation, lift, image_set, operator, violated, discord (structural).
struct Claim {
  std::string kind;
  nlohmann::json value;
  std::string relation = "tight";  // "tight": equal within tolerance; "valid": computed <= value
  std::string citation;
  nlohmann::json params = nlohmann::json::object();

  bool operator==(const Claim&) const = default;
};

struct Fixture {
  std::string name;
  std::string topic;
  std::string provenance;
  std::string inequality_text;  // either a full inequality or an expression
  std::optional<double> bound_value;  // for bounds that are not rational
  Sense sense = Sense::Upper;
  std::string assignment = "";  // assignment text, "optimize", or empty for fixed Paulis only
  std::optional<nlohmann::json> state;
  std::vector<std::vector<int>> separable_parties;
  std::vector<std::vector<int>> hybrid_parties;
  bool expected_mismatch = false;
  std::vector<Claim> claims;

  Inequality inequality() const;
  double stated_bound() const;  // bound_value or the parsed rational bound
  nlohmann::json to_json() const;
  static Fixture from_json(const nlohmann::json& j);

  bool operator==(const Fixture&) const = default;
};

Fixture load_fixture(const std::string& path);
// All *.json files of a directory, sorted by file name. Throws Error naming the
// offending file when one does not load.
std::vector<Fixture> load_catalog(const std::string& dir);
// STABHOM_FIXTURES when set, otherwise the fixtures directory of the source tree.
std::string default_fixtures_dir();

struct ClaimResult {
  Claim claim;
  nlohmann::json computed;
  bool match = false;
};

struct BoundReport {
  std::string name;
  std::optional<double> lhv;
  std::optional<double> separable;
  std::optional<double> hybrid;
  std::optional<double> quantum_value;
  std::optional<double> quantum_max;
  std::optional<double> algebraic;
  std::string verdict;  // no-violation, nonlocality, entanglement-only, audit-mismatch
  std::vector<ClaimResult> claims;
  bool claim_match = true;
  bool expected_mismatch = false;
  std::optional<StateVector> witness_state;

  // Fields: name, lhv, separable, hybrid, quantum_value, quantum_max, algebraic,
  // verdict, paper_claim, claim_match.
  nlohmann::json to_json() const;
  std::string to_text() const;
};

struct AuditOptions {
  double tolerance = 1e-6;
  std::uint64_t rng_seed = 0;
  int workers = 0;
};

BoundReport audit_fixture(const Fixture& f, const AuditOptions& options = {});

struct AuditSummary {
  std::vector<BoundReport> reports;
  std::vector<std::pair<std::string, std::string>> errors;  // fixture name, message
  std::vector<std::string> expected_mismatches;
  std::vector<std::string> unexpected_mismatches;

  // 0 when nothing unexpected happened, 1 on an unexpected mismatch, 2 on errors.
  int exit_code() const;
  nlohmann::json to_json() const;
};

AuditSummary audit_all(const std::vector<Fixture>& fixtures, const AuditOptions& options = {});

// Density operator from {"kind": "pure", "state": <state spec>} or
// {"kind": "cq", "probs": [...], "kets": [<1-qubit state spec>...], "rhos": [<density spec>...]}
// or {"kind": "mixed"} for the maximally mixed state of "width" qubits.
DensityOperator density_from_spec(const nlohmann::json& spec);

}  // namespace stabhom
