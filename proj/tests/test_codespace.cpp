#include <random>
#include <set>

#include "doctest.h"
#include "stabhom/codespace.hpp"
#include "stabhom/errors.hpp"
#include "support/oracles.hpp"

using namespace stabhom;

namespace {

using Strings = std::vector<std::string>;

Strings images(const LogicalEncoding& enc, Letter l) { return image_set(enc, l).strings(); }

LogicalEncoding cluster_encoding() {
  return LogicalEncoding(make_pair_superposition("00", "11", M_SQRT1_2, M_SQRT1_2),
                         make_pair_superposition("00", "11", M_SQRT1_2, -M_SQRT1_2), "cluster");
}

// Dense-matrix classification: the sign s with P restricted to the code equal to
// s * letter, or 0.
int oracle_sign(const std::string& letters, const LogicalEncoding& enc, char letter) {
  const Eigen::MatrixXcd p = oracle::letters_matrix(letters);
  Eigen::MatrixXcd v(p.rows(), 2);
  v.col(0) = enc.zero().amplitudes();
  v.col(1) = enc.one().amplitudes();
  const Eigen::MatrixXcd m = v.adjoint() * p * v;
  if ((p * v - v * m).norm() > 1e-9) return 0;
  const Eigen::MatrixXcd s = oracle::pauli2(letter);
  if ((m - s).norm() < 1e-9) return 1;
  if ((m + s).norm() < 1e-9) return -1;
  return 0;
}

// Image set computed directly from dense matrices over all 4^N strings.
std::set<std::string> oracle_images(const LogicalEncoding& enc, char letter) {
  std::set<std::string> out;
  const int n = enc.width();
  std::string letters(static_cast<std::size_t>(n), 'I');
  const char alphabet[] = {'I', 'X', 'Y', 'Z'};
  for (int code = 0; code < (1 << (2 * n)); ++code) {
    for (int k = 0; k < n; ++k) letters[static_cast<std::size_t>(k)] = alphabet[(code >> (2 * k)) & 3];
    const int s = oracle_sign(letters, enc, letter);
    if (s != 0) out.insert(PauliString::from_letters(letters, s > 0 ? 0 : 2).str());
  }
  return out;
}

}  // namespace

TEST_SUITE("codespace") {
  TEST_CASE("classification examples on the two-qubit GHZ code") {
    const LogicalEncoding enc = LogicalEncoding::ghz(2);
    CHECK(classify_action(SignedPauliTerm::parse("+Z1Z2"), enc) == LogicalAction{Letter::I, 1});
    CHECK(classify_action(SignedPauliTerm::parse("-Y1Y2"), enc) == LogicalAction{Letter::X, 1});
    CHECK_FALSE(classify_action(SignedPauliTerm::parse("+X1", 2), enc).has_value());
    CHECK_THROWS_AS(classify_action(SignedPauliTerm::parse("+X1X2X3"), enc), DimensionError);
  }

  TEST_CASE("two-qubit GHZ image sets") {
    const LogicalEncoding enc = LogicalEncoding::ghz(2);
    CHECK(images(enc, Letter::X) == Strings{"+X1X2", "-Y1Y2"});
    CHECK(images(enc, Letter::I) == Strings{"+I", "+Z1Z2"});
  }

  TEST_CASE("three-qubit GHZ image sets") {
    const LogicalEncoding enc = LogicalEncoding::ghz(3);
    const Strings x = images(enc, Letter::X);
    CHECK(std::set<std::string>(x.begin(), x.end()) ==
          std::set<std::string>{"+X1X2X3", "-X1Y2Y3", "-Y1X2Y3", "-Y1Y2X3"});
    const Strings y = images(enc, Letter::Y);
    CHECK(std::set<std::string>(y.begin(), y.end()) ==
          std::set<std::string>{"+Y1X2X3", "-Y1Y2Y3", "+X1Y2X3", "+X1X2Y3"});
    CHECK(images(enc, Letter::I) == Strings{"+I", "+Z1Z2", "+Z1Z3", "+Z2Z3"});
  }

  TEST_CASE("image sets agree with the dense oracle") {
    const std::vector<LogicalEncoding> encs = {LogicalEncoding::ghz(2), LogicalEncoding::ghz(3), cluster_encoding(),
                                               LogicalEncoding::basis_pair("01", "10"),
                                               LogicalEncoding::basis_pair("0110", "1011")};
    for (const auto& enc : encs) {
      for (char l : {'I', 'X', 'Y', 'Z'}) {
        const Strings got = images(enc, letter_from_char(l));
        CHECK(std::set<std::string>(got.begin(), got.end()) == oracle_images(enc, l));
      }
    }
  }

  TEST_CASE("cluster encoding image sets for the stated logical basis") {
    // |0_L> = Phi+, |1_L> = Phi-. The computed signs are the opposite of the
    // printed ones, which correspond to the swapped basis; see the cluster4 fixture.
    const LogicalEncoding enc = cluster_encoding();
    CHECK(images(enc, Letter::Z) == Strings{"+X1X2", "-Y1Y2"});
    CHECK(images(enc, Letter::Y) == Strings{"-X1Y2", "-Y1X2"});
    CHECK(images(enc, Letter::X) == Strings{"+Z1", "+Z2"});
    const LogicalEncoding swapped(enc.one(), enc.zero(), "cluster-swapped");
    CHECK(images(swapped, Letter::Z) == Strings{"-X1X2", "+Y1Y2"});
    CHECK(images(swapped, Letter::Y) == Strings{"+X1Y2", "+Y1X2"});
  }

  TEST_CASE("homomorphism property") {
    for (const auto& enc : {LogicalEncoding::ghz(2), LogicalEncoding::ghz(3), LogicalEncoding::ghz(4), cluster_encoding()}) {
      const HomomorphismCheck h = verify_homomorphism(enc);
      CHECK_MESSAGE(h.ok, enc.label());
      CHECK(h.pairs_checked > 0);
    }
  }

  TEST_CASE("capacity and precondition errors") {
    CHECK_THROWS_AS(image_set(LogicalEncoding::ghz(9), Letter::X), CapacityError);
    CHECK_THROWS_AS(verify_homomorphism(LogicalEncoding::ghz(7)), CapacityError);
    CHECK_THROWS_AS(LogicalEncoding(StateVector::basis("00"), make_pair_superposition("00", "11", M_SQRT1_2, M_SQRT1_2)),
                    DomainError);
    CHECK_THROWS_AS(LogicalEncoding(StateVector::basis("00"), StateVector::basis("111")), DimensionError);
  }

  TEST_CASE("X and Y image sets have equal size and Z-images map X-images to Y-images") {
    for (const auto& enc : {LogicalEncoding::ghz(2), LogicalEncoding::ghz(3), cluster_encoding(),
                            LogicalEncoding::basis_pair("001", "110")}) {
      const ImageSet xs = image_set(enc, Letter::X);
      const ImageSet ys = image_set(enc, Letter::Y);
      const ImageSet zs = image_set(enc, Letter::Z);
      const ImageSet is = image_set(enc, Letter::I);
      CHECK(xs.members.size() == ys.members.size());
      REQUIRE_FALSE(zs.members.empty());
      // Z X = iY on the code, so (Z-image)(X-image) = i (Y-image).
      const PauliString z = zs.members.front().as_phased();
      std::set<std::string> mapped;
      for (const auto& x : xs.members) {
        const PauliString prod = multiply(z, x.as_phased());
        REQUIRE(prod.phase_exp() % 2 == 1);
        const SignedPauliTerm y = SignedPauliTerm::from_phased(prod.with_phase((prod.phase_exp() + 3) % 4));
        CHECK(ys.contains(y));
        mapped.insert(y.str());
      }
      CHECK(mapped.size() == ys.members.size());
      // Multiplying by an I-image permutes the X-images.
      const PauliString i = is.members.back().as_phased();
      std::set<std::string> permuted;
      for (const auto& x : xs.members) permuted.insert(SignedPauliTerm::from_phased(multiply(i, x.as_phased())).str());
      const Strings xstr = xs.strings();
      CHECK(permuted == std::set<std::string>(xstr.begin(), xstr.end()));
    }
  }

  TEST_CASE("basis-pair X-images act with X or Y exactly on the differing sites") {
    for (int n = 1; n <= 4; ++n) {
      for (int a = 0; a < (1 << n); ++a) {
        for (int b = 0; b < (1 << n); ++b) {
          if (a == b) continue;
          auto bits = [n](int v) {
            std::string s;
            for (int k = n - 1; k >= 0; --k) s += ((v >> k) & 1) ? '1' : '0';
            return s;
          };
          const ImageSet xs = image_set(LogicalEncoding::basis_pair(bits(a), bits(b)), Letter::X);
          REQUIRE_FALSE(xs.members.empty());
          for (const auto& m : xs.members) {
            const std::uint32_t flips = static_cast<std::uint32_t>(a ^ b);
            CHECK(m.string().x_mask() == flips);
          }
        }
      }
    }
  }

  TEST_CASE("GHZ identity and X images commute globally but some pair clashes locally") {
    for (const auto& enc : {LogicalEncoding::ghz(2), LogicalEncoding::ghz(3), LogicalEncoding::ghz(4)}) {
      std::vector<PauliString> all;
      for (const auto& m : image_set(enc, Letter::I).members) all.push_back(m.as_phased());
      for (const auto& m : image_set(enc, Letter::X).members) all.push_back(m.as_phased());
      bool local_clash = false;
      for (const auto& p : all) {
        for (const auto& q : all) {
          CHECK(commutes(p, q));
          for (int s = 0; s < enc.width(); ++s) {
            const Letter a = p.letter(s), b = q.letter(s);
            if (a != Letter::I && b != Letter::I && a != b) local_clash = true;
          }
        }
      }
      CHECK(local_clash);
    }
  }

  TEST_CASE("images act on encoded states exactly like the logical letter") {
    std::mt19937_64 rng(21);
    for (const auto& enc : {LogicalEncoding::ghz(2), LogicalEncoding::ghz(3), cluster_encoding()}) {
      for (Letter l : {Letter::I, Letter::X, Letter::Y, Letter::Z}) {
        const Eigen::MatrixXcd sigma = logical_matrix(l);
        for (const auto& m : image_set(enc, l).members) {
          for (int k = 0; k < 5; ++k) {
            const Eigen::VectorXcd psi = oracle::random_state(1, rng);
            const Eigen::VectorXcd enc_psi = enc.encode(psi(0), psi(1));
            const double logical = (psi.adjoint() * sigma * psi)(0, 0).real();
            CHECK(expectation(enc_psi, PauliSum::from_term(m)) == doctest::Approx(logical).epsilon(1e-10));
          }
        }
      }
    }
  }

  TEST_CASE("encodings load from JSON") {
    const LogicalEncoding a = LogicalEncoding::from_json(nlohmann::json::parse(R"({"n": 3, "zero": "000", "one": "111"})"));
    CHECK(a.width() == 3);
    CHECK(images(a, Letter::I) == images(LogicalEncoding::ghz(3), Letter::I));
    const LogicalEncoding b = LogicalEncoding::from_json("ghz-2");
    CHECK(b.label() == "ghz-2");
    const LogicalEncoding c = LogicalEncoding::from_json(
        nlohmann::json::parse(R"({"zero": [[0.7071067811865476,0],[0,0],[0,0],[0.7071067811865476,0]],
                                  "one":  [[0.7071067811865476,0],[0,0],[0,0],[-0.7071067811865476,0]]})"));
    CHECK(images(c, Letter::Z) == images(cluster_encoding(), Letter::Z));
  }
}
