#pragma once

// Numerical tolerances shared by every module.

namespace stabhom::tol {

inline constexpr double kNorm = 1e-10;
inline constexpr double kHermitian = 1e-10;
inline constexpr double kEigen = 1e-8;
inline constexpr double kCompare = 1e-7;
inline constexpr double kPsd = 1e-9;
inline constexpr double kCodeSpace = 1e-9;
inline constexpr double kViolation = 1e-9;
inline constexpr double kClaim = 1e-6;
inline constexpr double kImaginary = 1e-10;
inline constexpr double kPrune = 1e-12;

}  // namespace stabhom::tol
