#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stabhom/bounds.hpp"
#include "stabhom/codespace.hpp"
#include "stabhom/ineq.hpp"
#include "stabhom/statevec.hpp"

namespace stabhom {

inline constexpr int kMaxDescendantWidth = 8;
inline constexpr std::uint64_t kDefaultAssignmentCap = 100000;

// How the images of a logical setting are distributed over its occurrences.
//   PerOccurrence: each occurrence gets its own image, distinct across the
//                  occurrences of one setting.
//   Uniform:       one image per setting, shared by all of its occurrences.
//   AllImages:     each occurrence is replaced by the sum of all images.
enum class SubstitutionMode { PerOccurrence, Uniform, AllImages };

std::string to_string(SubstitutionMode m);
SubstitutionMode substitution_mode_from_string(const std::string& s);

struct SubstitutionPlan {
  int target_site = 1;
  LogicalEncoding encoding = LogicalEncoding::ghz(2);
  // Symbolic settings at the target site and the logical letter each stands for.
  // Fixed Pauli settings at the target site stand for their own letter.
  std::map<SettingSymbol, Letter> letter_map;
  SubstitutionMode mode = SubstitutionMode::PerOccurrence;
  // Image indices: one per occurrence (PerOccurrence) or a single entry (Uniform).
  // Ignored for AllImages.
  std::map<SettingSymbol, std::vector<int>> choices;
  // Replace every other symbolic setting by its realization in Pauli components
  // before substituting; the result is rescaled to its smallest coefficient.
  bool expand_partners = false;
  Assignment partner_realization;
};

struct Substitution {
  InequalityAST expression;  // canonical, bound unset
  // Qubit observables for every symbolic setting of the expression: generated
  // settings map back to the Pauli letter they replaced, kept settings to their
  // seed realization.
  Assignment realization;
  double scale = 1.0;  // factor removed when rescaling
};

// Throws DomainError for invalid plans and CapacityError when the result is
// wider than kMaxDescendantWidth.
Substitution substitute(const InequalityAST& seed, const SubstitutionPlan& plan);

// Seed state with the target qubit's |0>, |1> replaced by the logical states.
StateVector lift_state(const StateVector& seed_state, int target_site, const LogicalEncoding& enc);

// Observables for the seed: target settings pinned to their letters, the rest
// from a see-saw on the fixed seed state (both signs tried, larger |value| kept).
Assignment realize_seed(const InequalityAST& seed, int target_site, const std::map<SettingSymbol, Letter>& letter_map,
                        const StateVector& seed_state, std::uint64_t rng_seed = 0, int workers = 0);

struct DescendantResult {
  Inequality descendant;  // bound unset
  double lhv_bound = 0.0;   // two-sided: max |value| over deterministic strategies
  double quantum_value = 0.0;  // |<B>| on the lifted state
  double violation_ratio = 0.0;
  bool accepted = false;
  StateVector quantum_state;
  Assignment realization;
  std::map<SettingSymbol, std::vector<int>> choices;

  nlohmann::json to_json(bool include_state = false) const;
};

struct DescendOptions {
  SubstitutionMode mode = SubstitutionMode::PerOccurrence;
  bool expand_partners = true;
  std::uint64_t cap = kDefaultAssignmentCap;
  std::optional<StateVector> seed_state;  // default GHZ on the seed's width
  std::uint64_t rng_seed = 0;
  int workers = 0;
};

struct DescendReport {
  std::string seed_name;
  int target_site = 1;
  std::string encoding;
  SubstitutionMode mode = SubstitutionMode::PerOccurrence;
  std::uint64_t candidates = 0;  // assignments evaluated
  std::uint64_t total = 0;       // assignments that exist
  bool truncated = false;
  Assignment seed_realization;
  std::vector<DescendantResult> results;  // deduplicated, best violation first

  nlohmann::json to_json() const;
};

DescendReport enumerate_descendants(const Inequality& seed, int target_site, const LogicalEncoding& enc,
                                    const std::map<SettingSymbol, Letter>& letter_map,
                                    const DescendOptions& options = {});

struct LiftedWitness {
  Inequality witness;          // sum of all images <= bound (rational approximation)
  double bound = 0.0;          // exact image count times threshold
  std::size_t image_count = 0;
  double lhv_bound = 0.0;
  double separable_bound = 0.0;  // first qubit against the rest
  StateVector lifted_state;      // image of (|0> + |1>)/sqrt2
  double quantum_value = 0.0;
};

// Lifts the coherence witness <letter> <= threshold through all images of the
// letter: sum of images <= (number of images) * threshold.
LiftedWitness lift_coherence_witness(double threshold, Letter letter, const LogicalEncoding& enc);

}  // namespace stabhom
