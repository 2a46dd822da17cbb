#include "stabhom/codespace.hpp"

#include <algorithm>
#include <cmath>

#include "stabhom/errors.hpp"
#include "stabhom/parallel.hpp"
#include "stabhom/tolerances.hpp"

namespace stabhom {

LogicalEncoding::LogicalEncoding(StateVector zero, StateVector one, std::string label)
    : zero_(std::move(zero)), one_(std::move(one)), label_(std::move(label)) {
  if (zero_.width() != one_.width()) throw DimensionError("logical states have different widths");
  if (std::abs(zero_.amplitudes().dot(one_.amplitudes())) > tol::kNorm) {
    throw DomainError("logical states are not orthogonal");
  }
}

LogicalEncoding LogicalEncoding::ghz(int n) {
  return LogicalEncoding(StateVector::basis(std::string(n, '0')), StateVector::basis(std::string(n, '1')),
                         "ghz-" + std::to_string(n));
}

LogicalEncoding LogicalEncoding::basis_pair(std::string_view zero_bits, std::string_view one_bits) {
  if (zero_bits == one_bits) throw DomainError("logical basis states must differ");
  return LogicalEncoding(StateVector::basis(zero_bits), StateVector::basis(one_bits),
                         "basis-" + std::string(zero_bits) + "-" + std::string(one_bits));
}

LogicalEncoding LogicalEncoding::from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.rfind("ghz-", 0) == 0) return ghz(std::stoi(s.substr(4)));
    throw DomainError("unknown encoding shorthand '" + s + "'");
  }
  if (!j.contains("kind")) {
    // {"n": 3, "zero": "000", "one": "111"} or amplitude lists for zero and one.
    const auto& z = j.at("zero");
    const auto& o = j.at("one");
    if (z.is_string() && o.is_string()) return basis_pair(z.get<std::string>(), o.get<std::string>());
    return LogicalEncoding(StateVector::from_json(z), StateVector::from_json(o), j.value("label", "custom"));
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ghz") return ghz(j.at("n").get<int>());
  if (kind == "basis") return basis_pair(j.at("zero").get<std::string>(), j.at("one").get<std::string>());
  if (kind == "states") {
    return LogicalEncoding(state_from_spec(j.at("zero")), state_from_spec(j.at("one")), j.value("label", "custom"));
  }
  throw DomainError("unknown encoding kind '" + kind + "'");
}

nlohmann::json LogicalEncoding::to_json() const {
  return {{"label", label_}, {"zero", zero_.to_json()}, {"one", one_.to_json()}};
}

Eigen::VectorXcd LogicalEncoding::encode(Complex a, Complex b) const {
  return a * zero_.amplitudes() + b * one_.amplitudes();
}

Eigen::Matrix2cd logical_matrix(Letter letter) {
  Eigen::Matrix2cd m;
  switch (letter) {
    case Letter::I: m << 1, 0, 0, 1; break;
    case Letter::X: m << 0, 1, 1, 0; break;
    case Letter::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case Letter::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

std::optional<Eigen::Matrix2cd> restrict_to_code(const PauliString& p, const LogicalEncoding& enc) {
  if (p.width() != enc.width()) throw DimensionError("string width does not match the encoding");
  const Eigen::VectorXcd* basis[2] = {&enc.zero().amplitudes(), &enc.one().amplitudes()};
  Eigen::Matrix2cd m;
  for (int b = 0; b < 2; ++b) {
    const Eigen::VectorXcd image = apply(p, *basis[b]);
    Eigen::VectorXcd residual = image;
    for (int a = 0; a < 2; ++a) {
      m(a, b) = basis[a]->dot(image);
      residual -= m(a, b) * *basis[a];
    }
    if (residual.norm() > tol::kCodeSpace) return std::nullopt;
  }
  return m;
}

std::optional<LogicalAction> classify_action(const SignedPauliTerm& p, const LogicalEncoding& enc) {
  const auto m = restrict_to_code(p.as_phased(), enc);
  if (!m) return std::nullopt;
  for (Letter l : {Letter::I, Letter::X, Letter::Y, Letter::Z}) {
    const Eigen::Matrix2cd sigma = logical_matrix(l);
    for (int s : {1, -1}) {
      if ((*m - static_cast<double>(s) * sigma).cwiseAbs().maxCoeff() <= tol::kCodeSpace) return LogicalAction{l, s};
    }
  }
  return std::nullopt;
}

bool ImageSet::contains(const SignedPauliTerm& t) const {
  return std::find(members.begin(), members.end(), t) != members.end();
}

std::vector<std::string> ImageSet::strings() const {
  std::vector<std::string> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m.str());
  return out;
}

ImageSet image_set(const LogicalEncoding& enc, Letter letter, int workers) {
  const int n = enc.width();
  if (n > kMaxImageWidth) {
    throw CapacityError("image sets are limited to " + std::to_string(kMaxImageWidth) + " qubits, got " +
                        std::to_string(n));
  }
  const std::uint32_t span = 1u << n;
  // One chunk per x mask; each scans every z mask.
  std::vector<std::vector<SignedPauliTerm>> found(span);
  parallel_for(span, workers, [&](std::size_t x) {
    for (std::uint32_t z = 0; z < span; ++z) {
      const PauliString p(n, static_cast<std::uint32_t>(x), z, 0);
      const auto action = classify_action(SignedPauliTerm(1.0, p), enc);
      if (action && action->letter == letter) found[x].emplace_back(static_cast<double>(action->sign), p);
    }
  });
  ImageSet out;
  out.logical_letter = letter;
  for (auto& chunk : found) out.members.insert(out.members.end(), chunk.begin(), chunk.end());
  std::sort(out.members.begin(), out.members.end(), [](const SignedPauliTerm& a, const SignedPauliTerm& b) {
    return canonical_less(a.string(), b.string());
  });
  return out;
}

HomomorphismCheck verify_homomorphism(const LogicalEncoding& enc, int workers) {
  if (enc.width() > kMaxHomomorphismWidth) {
    throw CapacityError("homomorphism checks are limited to " + std::to_string(kMaxHomomorphismWidth) + " qubits");
  }
  const Letter letters[4] = {Letter::I, Letter::X, Letter::Y, Letter::Z};
  std::vector<ImageSet> images;
  for (Letter l : letters) images.push_back(image_set(enc, l, workers));

  HomomorphismCheck out;
  for (const auto& ia : images) {
    for (const auto& ib : images) {
      const Eigen::Matrix2cd expected = logical_matrix(ia.logical_letter) * logical_matrix(ib.logical_letter);
      for (const auto& p : ia.members) {
        for (const auto& q : ib.members) {
          ++out.pairs_checked;
          const PauliString product = multiply(p.as_phased(), q.as_phased());
          const auto m = restrict_to_code(product, enc);
          const bool good = m && (*m - expected).cwiseAbs().maxCoeff() <= tol::kCodeSpace;
          if (!good) {
            out.ok = false;
            if (out.violations.size() < 20) {
              out.violations.push_back(p.str() + " * " + q.str() + " does not act as " +
                                       letter_char(ia.logical_letter) + letter_char(ib.logical_letter));
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace stabhom
