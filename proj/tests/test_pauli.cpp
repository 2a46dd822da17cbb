#include <random>

#include "doctest.h"
#include "stabhom/errors.hpp"
#include "stabhom/pauli.hpp"
#include "support/oracles.hpp"

using namespace stabhom;

namespace {

bool matrices_equal(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double tol = 1e-12) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

std::vector<PauliString> all_strings(int width) {
  std::vector<PauliString> out;
  const std::uint32_t n = 1u << width;
  for (std::uint32_t x = 0; x < n; ++x) {
    for (std::uint32_t z = 0; z < n; ++z) {
      for (int ph = 0; ph < 4; ++ph) out.emplace_back(width, x, z, ph);
    }
  }
  return out;
}

Eigen::MatrixXcd oracle_matrix(const PauliString& p) { return oracle::phase_matrix(p.phase_exp(), p.letters()); }

// Sites where both letters are non-identity and differ.
int clash_count(const PauliString& p, const PauliString& q) {
  int n = 0;
  for (int s = 0; s < p.width(); ++s) {
    const Letter a = p.letter(s), b = q.letter(s);
    if (a != Letter::I && b != Letter::I && a != b) ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("pauli-core") {
  TEST_CASE("single-site products follow the Pauli algebra") {
    CHECK(multiply(PauliString::parse("+X1"), PauliString::parse("+Y1")) == PauliString::parse("+iZ1"));
    CHECK(multiply(PauliString::parse("+Y1"), PauliString::parse("+X1")) == PauliString::parse("-iZ1"));
    CHECK(multiply(PauliString::parse("+Z1Z2"), PauliString::parse("+Z1Z2")) == PauliString::identity(2));
  }

  TEST_CASE("X1X2 times -Y1Y2 matches the dense product") {
    const PauliString a = PauliString::parse("+X1X2");
    const PauliString b = PauliString::parse("-Y1Y2");
    const PauliString ab = multiply(a, b);
    CHECK(matrices_equal(oracle_matrix(ab), oracle_matrix(a) * oracle_matrix(b)));
    CHECK(ab == PauliString::parse("+Z1Z2"));
  }

  TEST_CASE("multiplication is exhaustive-exact for widths 1 and 2") {
    for (int w = 1; w <= 2; ++w) {
      const auto all = all_strings(w);
      for (const auto& p : all) {
        for (const auto& q : all) {
          const PauliString pq = multiply(p, q);
          REQUIRE(matrices_equal(to_matrix(pq), oracle_matrix(p) * oracle_matrix(q)));
          const bool dense_commute = matrices_equal(oracle_matrix(p) * oracle_matrix(q), oracle_matrix(q) * oracle_matrix(p));
          REQUIRE(commutes(p, q) == dense_commute);
          REQUIRE(commutes(p, q) == (clash_count(p, q) % 2 == 0));
        }
      }
    }
  }

  TEST_CASE("multiplication and commutation on random strings of widths 3 and 4") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> ph(0, 3);
    int cases = 0;
    for (int w = 3; w <= 4; ++w) {
      for (int k = 0; k < 600; ++k, ++cases) {
        const PauliString p = PauliString::from_letters(oracle::random_letters(w, rng), ph(rng));
        const PauliString q = PauliString::from_letters(oracle::random_letters(w, rng), ph(rng));
        const PauliString r = PauliString::from_letters(oracle::random_letters(w, rng), ph(rng));
        REQUIRE(matrices_equal(to_matrix(multiply(p, q)), oracle_matrix(p) * oracle_matrix(q)));
        REQUIRE(commutes(p, q) == (clash_count(p, q) % 2 == 0));
        REQUIRE(multiply(multiply(p, q), r) == multiply(p, multiply(q, r)));
      }
    }
    CHECK(cases >= 1000);
  }

  TEST_CASE("commutation examples") {
    CHECK(commutes(PauliString::parse("+X1X2"), PauliString::parse("-Y1Y2")));
    CHECK_FALSE(commutes(PauliString::parse("+X1"), PauliString::parse("+Y1")));
    CHECK(commutes(PauliString::parse("+X1X2X3"), PauliString::parse("+Z1Z2", 3)));
  }

  TEST_CASE("every string squares to phase^2 times the identity") {
    for (const auto& p : all_strings(2)) {
      const PauliString sq = multiply(p, p);
      CHECK(sq.weight() == 0);
      CHECK(sq.phase_exp() == (2 * p.phase_exp()) % 4);
    }
  }

  TEST_CASE("tensor products") {
    CHECK(tensor(PauliString::parse("+X1"), PauliString::identity(1)) == PauliString::parse("+X1", 2));
    CHECK(tensor(PauliString::parse("+X1X2"), PauliString::parse("+Y1")) == PauliString::parse("+X1X2Y3"));
    const PauliString iz = PauliString::parse("+iZ1");
    const PauliString t = tensor(iz, iz);
    CHECK(t == PauliString::parse("-Z1Z2"));
    CHECK(matrices_equal(to_matrix(t), oracle::kron(oracle_matrix(iz), oracle_matrix(iz))));
    CHECK_THROWS_AS(tensor(PauliString::identity(7), PauliString::identity(6)), CapacityError);
  }

  TEST_CASE("dense matrices") {
    CHECK(matrices_equal(to_matrix(PauliString::identity(1)), Eigen::MatrixXcd::Identity(2, 2)));
    Eigen::MatrixXcd y(2, 2);
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    CHECK(matrices_equal(to_matrix(PauliString::parse("+Y1")), y));
    Eigen::MatrixXcd zz = Eigen::MatrixXcd::Zero(4, 4);
    zz.diagonal() << 1, -1, -1, 1;
    CHECK(matrices_equal(to_matrix(PauliString::parse("+Z1Z2")), zz));
    // Hermitian iff the phase is real; unitary always.
    for (const auto& p : all_strings(1)) {
      const Eigen::MatrixXcd m = to_matrix(p);
      CHECK(matrices_equal(m * m.adjoint(), Eigen::MatrixXcd::Identity(2, 2)));
      CHECK(matrices_equal(m, m.adjoint()) == p.is_hermitian());
    }
  }

  TEST_CASE("apply agrees with the dense matrix") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
      const PauliString p = PauliString::from_letters(oracle::random_letters(4, rng), k % 4);
      const Eigen::VectorXcd v = oracle::random_state(4, rng);
      CHECK((apply(p, v) - oracle_matrix(p) * v).norm() < 1e-12);
    }
  }

  TEST_CASE("width errors") {
    CHECK_THROWS_AS(multiply(PauliString::identity(2), PauliString::identity(3)), DimensionError);
    CHECK_THROWS_AS(commutes(PauliString::identity(2), PauliString::identity(3)), DimensionError);
    CHECK_THROWS_AS(PauliString::identity(13), CapacityError);
  }

  TEST_CASE("text form round-trips") {
    for (const char* t : {"+X1X2", "-Y1Y2", "+X1X2X3", "+iZ3", "-iX1Y4", "+I"}) {
      CHECK(PauliString::parse(t).str() == t);
    }
    CHECK(PauliString::parse("+Z3").width() == 3);
    CHECK_THROWS_AS(PauliString::parse("+X2X1"), ParseError);
    CHECK_THROWS_AS(PauliString::parse("+Q1"), ParseError);
    CHECK_THROWS_AS(PauliString::parse("+X0"), ParseError);
    CHECK(SignedPauliTerm::parse("-Y1Y2").str() == "-Y1Y2");
    CHECK(SignedPauliTerm::parse("-Y1Y2").coefficient() == -1.0);
    CHECK_THROWS_AS(SignedPauliTerm::parse("+iZ1"), DomainError);
  }

  TEST_CASE("signed terms reject zero and non-finite coefficients") {
    CHECK_THROWS_AS(SignedPauliTerm(0.0, PauliString::identity(1)), DomainError);
    CHECK_THROWS_AS(SignedPauliTerm(NAN, PauliString::identity(1)), DomainError);
    CHECK_THROWS_AS(SignedPauliTerm(1.0, PauliString::parse("-X1")), DomainError);
  }

  TEST_CASE("canonical order: weight, then X < Y < Z < I per site") {
    std::vector<PauliString> v = {PauliString::parse("+Z1Z2"), PauliString::parse("+X1X2"), PauliString::parse("+I", 2),
                                  PauliString::parse("+Y2", 2), PauliString::parse("+X1", 2)};
    std::sort(v.begin(), v.end(), canonical_less);
    std::vector<std::string> s;
    for (const auto& p : v) s.push_back(p.str());
    CHECK(s == std::vector<std::string>{"+I", "+X1", "+Y2", "+X1X2", "+Z1Z2"});
  }

  TEST_CASE("Pauli sums collect like terms and match dense sums") {
    PauliSum s(2);
    s.add(1.0, PauliString::parse("+X1X2"));
    s.add(1.0, PauliString::parse("-Y1Y2"));
    s.add(0.5, PauliString::parse("+X1X2"));
    CHECK(s.size() == 2);
    CHECK(s.coefficient_of(PauliString::parse("+X1X2")) == doctest::Approx(1.5));
    CHECK(s.coefficient_of(PauliString::parse("+Y1Y2")) == doctest::Approx(-1.0));
    const Eigen::MatrixXcd dense = 1.5 * oracle::letters_matrix("XX") - oracle::letters_matrix("YY");
    CHECK(matrices_equal(s.to_matrix(), dense));
    CHECK(matrices_equal(multiply(s, s).to_matrix(), dense * dense));
  }
}
