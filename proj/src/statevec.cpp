#include "stabhom/statevec.hpp"

#include <cmath>

#include "stabhom/errors.hpp"
#include "stabhom/tolerances.hpp"

namespace stabhom {

namespace {

std::size_t dim_for(int width) {
  if (width < 1) throw DomainError("qubit count must be at least 1");
  if (width > kMaxWidth) throw CapacityError("qubit count " + std::to_string(width) + " exceeds the cap of 12");
  return std::size_t{1} << width;
}

std::uint32_t parse_bits(std::string_view bits) {
  if (bits.empty()) throw DomainError("empty bitstring");
  std::uint32_t v = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw DomainError("bitstring may contain only 0 and 1");
    v = (v << 1) | static_cast<std::uint32_t>(c - '0');
  }
  return v;
}

void check_hermitian(const Eigen::MatrixXcd& op) {
  if (op.rows() != op.cols()) throw DimensionError("operator is not square");
  const double scale = std::max(1.0, op.cwiseAbs().maxCoeff());
  if ((op - op.adjoint()).cwiseAbs().maxCoeff() > tol::kHermitian * scale) {
    throw DomainError("operator is not Hermitian");
  }
}

}  // namespace

StateVector::StateVector(int width, Eigen::VectorXcd amplitudes) : width_(width), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != dim_for(width)) {
    throw DimensionError("state has " + std::to_string(amps_.size()) + " amplitudes, expected 2^" +
                         std::to_string(width));
  }
  if (std::abs(amps_.norm() - 1.0) > tol::kNorm) throw DomainError("state is not normalized");
}

StateVector StateVector::normalized(int width, Eigen::VectorXcd amplitudes) {
  const double n = amplitudes.norm();
  if (n < tol::kNorm) throw DomainError("cannot normalize a zero vector");
  return StateVector(width, amplitudes / n);
}

StateVector StateVector::basis(std::string_view bits) {
  const int width = static_cast<int>(bits.size());
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim_for(width)));
  v(parse_bits(bits)) = 1.0;
  return StateVector(width, v);
}

StateVector StateVector::ghz(int n, int relative_sign) {
  const std::size_t dim = dim_for(n);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  v(0) = M_SQRT1_2;
  v(static_cast<Eigen::Index>(dim - 1)) = relative_sign >= 0 ? M_SQRT1_2 : -M_SQRT1_2;
  return StateVector(n, v);
}

nlohmann::json StateVector::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index k = 0; k < amps_.size(); ++k) arr.push_back({amps_(k).real(), amps_(k).imag()});
  return arr;
}

StateVector StateVector::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("state JSON must be a nonempty array of [re, im] pairs");
  const std::size_t n = j.size();
  if ((n & (n - 1)) != 0) throw DimensionError("amplitude count is not a power of two");
  int width = 0;
  while ((std::size_t{1} << width) < n) ++width;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto& e = j[k];
    if (e.is_number()) {
      v(static_cast<Eigen::Index>(k)) = e.get<double>();
    } else if (e.is_array() && e.size() == 2) {
      v(static_cast<Eigen::Index>(k)) = Complex(e[0].get<double>(), e[1].get<double>());
    } else {
      throw DomainError("amplitude entries must be numbers or [re, im] pairs");
    }
  }
  return StateVector(width, v);
}

DensityOperator::DensityOperator(int width, Eigen::MatrixXcd matrix) : width_(width), rho_(std::move(matrix)) {
  const auto dim = static_cast<Eigen::Index>(dim_for(width));
  if (rho_.rows() != dim || rho_.cols() != dim) throw DimensionError("density matrix size does not match width");
  check_hermitian(rho_);
  if (std::abs(rho_.trace().real() - 1.0) > tol::kNorm || std::abs(rho_.trace().imag()) > tol::kNorm) {
    throw DomainError("density matrix trace is not 1");
  }
  if (min_eigenvalue(rho_) < -tol::kPsd) throw DomainError("density matrix is not positive semidefinite");
}

DensityOperator DensityOperator::pure(const StateVector& psi) {
  return DensityOperator(psi.width(), psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityOperator DensityOperator::maximally_mixed(int width) {
  const auto dim = static_cast<Eigen::Index>(dim_for(width));
  return DensityOperator(width, Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

StateVector make_pair_superposition(std::string_view a, std::string_view b, Complex amp_a, Complex amp_b) {
  if (a.size() != b.size()) throw DimensionError("bitstrings have different lengths");
  if (a == b) throw DomainError("the two bitstrings must differ");
  const double norm2 = std::norm(amp_a) + std::norm(amp_b);
  if (std::abs(norm2 - 1.0) > tol::kNorm) throw DomainError("amplitudes are not normalized");
  const int width = static_cast<int>(a.size());
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim_for(width)));
  v(parse_bits(a)) = amp_a;
  v(parse_bits(b)) = amp_b;
  return StateVector(width, v);
}

double expectation(const Eigen::VectorXcd& psi, const PauliSum& op) {
  const Complex e = psi.dot(op.apply(psi));
  if (std::abs(e.imag()) > tol::kImaginary * std::max(1.0, op.one_norm())) {
    throw DomainError("expectation has an imaginary residue");
  }
  return e.real();
}

double expectation(const StateVector& psi, const PauliSum& op) {
  if (psi.width() != op.width()) throw DimensionError("state and operator widths differ");
  return expectation(psi.amplitudes(), op);
}

double expectation(const StateVector& psi, const SignedPauliTerm& term) {
  if (psi.width() != term.width()) throw DimensionError("state and term widths differ");
  const Complex e = psi.amplitudes().dot(apply(term.string(), psi.amplitudes()));
  if (std::abs(e.imag()) > tol::kImaginary) throw DomainError("expectation has an imaginary residue");
  return term.coefficient() * e.real();
}

double expectation_density(const DensityOperator& rho, const PauliSum& op) {
  if (rho.width() != op.width()) throw DimensionError("state and operator widths differ");
  const Complex e = (rho.matrix() * op.to_matrix()).trace();
  if (std::abs(e.imag()) > tol::kImaginary * std::max(1.0, op.one_norm())) {
    throw DomainError("expectation has an imaginary residue");
  }
  return e.real();
}

double expectation_density(const DensityOperator& rho, const SignedPauliTerm& term) {
  return expectation_density(rho, PauliSum::from_term(term));
}

EigenPair top_eigenpair(const Eigen::MatrixXcd& op) {
  check_hermitian(op);
  if (op.rows() > 4096) throw CapacityError("operator dimension exceeds 4096");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op);
  const Eigen::Index last = op.rows() - 1;
  return {es.eigenvalues()(last), es.eigenvectors().col(last)};
}

EigenPair bottom_eigenpair(const Eigen::MatrixXcd& op) {
  check_hermitian(op);
  if (op.rows() > 4096) throw CapacityError("operator dimension exceeds 4096");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op);
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

double max_eigenvalue(const Eigen::MatrixXcd& op) {
  check_hermitian(op);
  if (op.rows() > 4096) throw CapacityError("operator dimension exceeds 4096");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(op.rows() - 1);
}

double min_eigenvalue(const Eigen::MatrixXcd& op) {
  check_hermitian(op);
  if (op.rows() > 4096) throw CapacityError("operator dimension exceeds 4096");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

DensityOperator make_cq_state(std::span<const double> probs, std::span<const Eigen::Vector2cd> kets,
                              std::span<const DensityOperator> rhos) {
  if (probs.empty() || probs.size() != kets.size() || probs.size() != rhos.size()) {
    throw DimensionError("probs, kets and rhos must have the same nonzero length");
  }
  if (probs.size() > 2) throw DomainError("a qubit admits at most two orthonormal kets");
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw DomainError("probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > tol::kNorm) throw DomainError("probabilities must sum to 1");
  for (std::size_t k = 0; k < kets.size(); ++k) {
    if (std::abs(kets[k].norm() - 1.0) > tol::kNorm) throw DomainError("kets must be normalized");
    for (std::size_t l = 0; l < k; ++l) {
      if (std::abs(kets[k].dot(kets[l])) > tol::kNorm) throw DomainError("kets must be mutually orthogonal");
    }
  }
  const int w2 = rhos[0].width();
  for (const auto& r : rhos) {
    if (r.width() != w2) throw DimensionError("all rho_k must have the same width");
  }
  const Eigen::Index d2 = Eigen::Index{1} << w2;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * d2, 2 * d2);
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const Eigen::Matrix2cd proj = kets[k] * kets[k].adjoint();
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) out.block(a * d2, b * d2, d2, d2) += probs[k] * proj(a, b) * rhos[k].matrix();
    }
  }
  return DensityOperator(w2 + 1, out);
}

Eigen::Matrix2cd reduced_first_qubit(const DensityOperator& rho) {
  const Eigen::Index half = rho.matrix().rows() / 2;
  Eigen::Matrix2cd r;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) r(a, b) = rho.matrix().block(a * half, b * half, half, half).trace();
  }
  return r;
}

Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

}  // namespace stabhom

namespace stabhom {

namespace {

Complex complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw DomainError("amplitude must be a number or an [re, im] pair");
}

}  // namespace

StateVector state_from_spec(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("kind")) throw DomainError("state spec must be an object with a kind");
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "basis") return StateVector::basis(spec.at("bits").get<std::string>());
  if (kind == "ghz") return StateVector::ghz(spec.at("n").get<int>(), spec.value("sign", 1));
  if (kind == "pair") {
    const std::string a = spec.at("a").get<std::string>();
    const std::string b = spec.at("b").get<std::string>();
    if (spec.contains("amp_a") || spec.contains("amp_b")) {
      return make_pair_superposition(a, b, complex_from_json(spec.at("amp_a")), complex_from_json(spec.at("amp_b")));
    }
    const int sign = spec.value("relative_sign", 1);
    return make_pair_superposition(a, b, M_SQRT1_2, sign >= 0 ? M_SQRT1_2 : -M_SQRT1_2);
  }
  if (kind == "amplitudes") {
    const auto& arr = spec.at("amplitudes");
    if (spec.value("normalize", false)) {
      const std::size_t n = arr.size();
      if (n == 0 || (n & (n - 1)) != 0) throw DimensionError("amplitude count is not a power of two");
      int width = 0;
      while ((std::size_t{1} << width) < n) ++width;
      Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) v(static_cast<Eigen::Index>(k)) = complex_from_json(arr[k]);
      return StateVector::normalized(width, v);
    }
    return StateVector::from_json(arr);
  }
  throw DomainError("unknown state kind '" + kind + "'");
}

namespace {

// "+", "-", "1" or "-1".
int parse_sign(const std::string& s) {
  if (s == "+" || s == "1" || s == "+1") return 1;
  if (s == "-" || s == "-1") return -1;
  throw DomainError("relative sign must be + or -, got '" + s + "'");
}

}  // namespace

StateVector state_from_text(std::string_view text) {
  const std::string t(text);
  if (!t.empty() && t.front() == '{') return state_from_spec(nlohmann::json::parse(t));
  const auto colon = t.find(':');
  if (colon == std::string::npos) throw DomainError("state text must look like kind:args or be JSON");
  const std::string kind = t.substr(0, colon);
  const std::string rest = t.substr(colon + 1);
  if (kind == "basis") return StateVector::basis(rest);
  if (kind == "ghz") {
    const auto c2 = rest.find(':');
    const int n = std::stoi(rest.substr(0, c2));
    const int sign = c2 == std::string::npos ? 1 : parse_sign(rest.substr(c2 + 1));
    return StateVector::ghz(n, sign);
  }
  if (kind == "pair") {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const auto comma = rest.find(',', start);
      parts.push_back(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (parts.size() < 2 || parts.size() > 3) throw DomainError("pair state needs a,b[,sign]");
    const bool minus = parts.size() == 3 && parse_sign(parts[2]) < 0;
    return make_pair_superposition(parts[0], parts[1], M_SQRT1_2, minus ? -M_SQRT1_2 : M_SQRT1_2);
  }
  throw DomainError("unknown state kind '" + kind + "'");
}

}  // namespace stabhom
