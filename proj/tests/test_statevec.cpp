#include <random>

#include "doctest.h"
#include "stabhom/errors.hpp"
#include "stabhom/statevec.hpp"
#include "support/oracles.hpp"

using namespace stabhom;

namespace {

PauliSum sum_of(std::initializer_list<const char*> terms, int width) {
  PauliSum s(width);
  for (const char* t : terms) {
    const SignedPauliTerm term = SignedPauliTerm::parse(t, width);
    s.add(term.coefficient(), term.string());
  }
  return s;
}

double dense_expectation(const Eigen::VectorXcd& v, const Eigen::MatrixXcd& m) { return (v.adjoint() * m * v)(0, 0).real(); }

// Eigenvalues of a 2x2 Hermitian matrix from its characteristic polynomial.
std::pair<double, double> eig2(const Eigen::Matrix2cd& m) {
  const double tr = (m(0, 0) + m(1, 1)).real();
  const double det = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)).real();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
  return {tr / 2 - disc, tr / 2 + disc};
}

}  // namespace

TEST_SUITE("statevec") {
  TEST_CASE("pair superpositions") {
    const StateVector bell = make_pair_superposition("00", "11", M_SQRT1_2, M_SQRT1_2);
    CHECK((bell.amplitudes() - oracle::pair("00", "11", 1)).norm() < 1e-14);
    const StateVector w = make_pair_superposition("011", "100", M_SQRT1_2, -M_SQRT1_2);
    CHECK((w.amplitudes() - oracle::pair("011", "100", -1)).norm() < 1e-14);
    const StateVector zero = make_pair_superposition("0", "1", 1.0, 0.0);
    CHECK((zero.amplitudes() - oracle::basis("0")).norm() < 1e-14);
    CHECK_THROWS_AS(make_pair_superposition("00", "00", M_SQRT1_2, M_SQRT1_2), DomainError);
    CHECK_THROWS_AS(make_pair_superposition("00", "11", 1.0, 1.0), DomainError);
    CHECK_THROWS(make_pair_superposition("00", "111", M_SQRT1_2, M_SQRT1_2));
  }

  TEST_CASE("state vectors validate their norm") {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(0) = 1.0;
    v(3) = 1.0;
    CHECK_THROWS_AS(StateVector(2, v), DomainError);
    CHECK(StateVector::normalized(2, v).amplitudes().norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS(StateVector(3, v / v.norm()), DimensionError);
  }

  TEST_CASE("expectations of single terms") {
    const StateVector bell = StateVector::ghz(2);
    CHECK(expectation(bell, SignedPauliTerm::parse("+X1X2")) == doctest::Approx(1.0));
    CHECK(expectation(bell, SignedPauliTerm::parse("-Y1Y2")) == doctest::Approx(1.0));
    const StateVector singlet = make_pair_superposition("01", "10", M_SQRT1_2, -M_SQRT1_2);
    CHECK(expectation(singlet, sum_of({"+X1X2", "+Y1Y2", "+Z1Z2"}, 2)) == doctest::Approx(-3.0));
    CHECK_THROWS_AS(expectation(bell, SignedPauliTerm::parse("+X1X2X3")), DimensionError);
  }

  TEST_CASE("expectation matches the dense oracle and stays within the coefficient range") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 100; ++k) {
      const int w = 1 + k % 4;
      const Eigen::VectorXcd v = oracle::random_state(w, rng);
      const std::string letters = oracle::random_letters(w, rng);
      const double c = 0.5 + (k % 3);
      const SignedPauliTerm t(k % 2 ? c : -c, PauliString::from_letters(letters));
      const double e = expectation(StateVector(w, v), t);
      CHECK(e == doctest::Approx(t.coefficient() * dense_expectation(v, oracle::letters_matrix(letters))).epsilon(1e-12));
      CHECK(std::abs(e) <= c + 1e-12);
    }
  }

  TEST_CASE("eigen-extremes") {
    CHECK(max_eigenvalue(to_matrix(PauliString::parse("+Z1"))) == doctest::Approx(1.0));
    const PauliSum mermin = sum_of({"+X1X2X3", "-X1Y2Y3", "-Y1X2Y3", "-Y1Y2X3"}, 3);
    CHECK(max_eigenvalue(mermin.to_matrix()) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(min_eigenvalue(mermin.to_matrix()) == doctest::Approx(-4.0).epsilon(1e-10));
    // NL1 operator: magnitude 6 on (|011> - |100>)/sqrt2.
    const PauliSum nl1 = sum_of({"+X1X2X3", "-X1Y2Y3", "+Y1X2Y3", "+Y1Y2X3", "+Z1Z2", "+Z1Z3"}, 3);
    CHECK(std::max(max_eigenvalue(nl1.to_matrix()), -min_eigenvalue(nl1.to_matrix())) == doctest::Approx(6.0));
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(max_eigenvalue(bad), DomainError);
  }

  TEST_CASE("max eigenvalue matches the characteristic polynomial in dimension 2") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int k = 0; k < 50; ++k) {
      Eigen::Matrix2cd m;
      const Complex off(n(rng), n(rng));
      m << n(rng), off, std::conj(off), n(rng);
      const auto [lo, hi] = eig2(m);
      CHECK(max_eigenvalue(m) == doctest::Approx(hi).epsilon(1e-10));
      CHECK(min_eigenvalue(m) == doctest::Approx(lo).epsilon(1e-10));
    }
  }

  TEST_CASE("max eigenvalue bounds random expectations") {
    std::mt19937_64 rng(9);
    const PauliSum op = sum_of({"+X1X2X3", "-X1Y2Y3", "+Y1X2Y3", "+Y1Y2X3", "+Z1Z2", "+Z1Z3"}, 3);
    const double top = max_eigenvalue(op.to_matrix());
    for (int k = 0; k < 100; ++k) CHECK(expectation(oracle::random_state(3, rng), op) <= top + 1e-9);
  }

  TEST_CASE("classical-quantum states") {
    const std::vector<double> p1 = {1.0, 0.0};
    const std::vector<Eigen::Vector2cd> z = {oracle::basis("0"), oracle::basis("1")};
    const std::vector<DensityOperator> r0 = {DensityOperator::pure(StateVector::basis("0")),
                                             DensityOperator::pure(StateVector::basis("1"))};
    const DensityOperator rho = make_cq_state(p1, z, r0);
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
    expected(0, 0) = 1.0;
    CHECK((rho.matrix() - expected).norm() < 1e-14);

    std::mt19937_64 rng(1);
    for (int k = 0; k < 20; ++k) {
      const std::vector<double> p = {0.5, 0.5};
      const std::vector<DensityOperator> r = {DensityOperator::pure(StateVector(1, oracle::random_state(1, rng))),
                                              DensityOperator::pure(StateVector(1, oracle::random_state(1, rng)))};
      const DensityOperator cq = make_cq_state(p, z, r);
      for (const char* m : {"+X1X2", "+X1Y2", "+X1Z2", "+X1"}) {
        CHECK(std::abs(expectation_density(cq, SignedPauliTerm::parse(m, 2))) < 1e-12);
      }
      const Eigen::Matrix2cd r1 = reduced_first_qubit(cq);
      CHECK(std::abs(r1(0, 1)) < 1e-12);
    }
    const std::vector<double> bad_p = {0.7, 0.7};
    CHECK_THROWS_AS(make_cq_state(bad_p, z, r0), DomainError);
    const std::vector<Eigen::Vector2cd> skew = {oracle::basis("0"), oracle::bloch_state(0.3, 0.0)};
    CHECK_THROWS_AS(make_cq_state(std::vector<double>{0.5, 0.5}, skew, r0), DomainError);
  }

  TEST_CASE("density expectations") {
    CHECK(expectation_density(DensityOperator::maximally_mixed(2), SignedPauliTerm::parse("+X1X2")) ==
          doctest::Approx(0.0));
    CHECK(expectation_density(DensityOperator::pure(StateVector::ghz(2)), SignedPauliTerm::parse("+X1X2")) ==
          doctest::Approx(1.0));
    Eigen::MatrixXcd not_psd = Eigen::MatrixXcd::Zero(2, 2);
    not_psd(0, 0) = 1.5;
    not_psd(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityOperator(1, not_psd), DomainError);
  }

  TEST_CASE("JSON round trip and state specs") {
    const StateVector s = make_pair_superposition("011", "100", M_SQRT1_2, -M_SQRT1_2);
    CHECK(StateVector::from_json(s.to_json()).amplitudes() == s.amplitudes());
    CHECK((state_from_text("pair:011,100,-").amplitudes() - s.amplitudes()).norm() < 1e-15);
    CHECK((state_from_text("pair:011,100,-1").amplitudes() - s.amplitudes()).norm() < 1e-15);
    CHECK((state_from_text("ghz:3").amplitudes() - StateVector::ghz(3).amplitudes()).norm() < 1e-15);
    CHECK_THROWS_AS(state_from_text("pair:01,10,x"), DomainError);
    CHECK((state_from_spec({{"kind", "basis"}, {"bits", "10"}}).amplitudes() - oracle::basis("10")).norm() < 1e-15);
  }

  TEST_CASE("site 1 is the most significant qubit") {
    const StateVector s = StateVector::basis("100");
    CHECK(std::abs(s.amplitude(4)) == doctest::Approx(1.0));
    CHECK(expectation(s, SignedPauliTerm::parse("+Z1", 3)) == doctest::Approx(-1.0));
    CHECK(expectation(s, SignedPauliTerm::parse("+Z3", 3)) == doctest::Approx(1.0));
  }
}
