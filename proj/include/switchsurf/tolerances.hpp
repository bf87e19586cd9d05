#pragma once

// Central numeric policy. Every floating-point comparison made by the library
// uses one of these constants so the thresholds can be audited in one place.

namespace switchsurf::tol {

// Inputs to symmetric-matrix routines must satisfy
//   max|M - M^T| <= kSymmetry * max(1, max|M|).
inline constexpr double kSymmetry = 1e-12;

// LU pivot threshold, relative to the largest entry of the factored matrix.
// Pivots at or below this are treated as exact singularity.
inline constexpr double kSingularPivot = 1e-13;

// Acceptable residual for a Lyapunov solve:
//   max|A^T P + P A + Q| <= kLyapunovResidual * (1 + max|Q|).
inline constexpr double kLyapunovResidual = 1e-10;

// Absolute half-width of the bisection bracket returned by
// min_symmetric_eigenvalue.
inline constexpr double kEigenBisect = 1e-9;

// Newton iteration for switched equilibria: step-norm convergence threshold,
// iteration cap, and damping (step halvings per iteration).
inline constexpr double kNewtonStep = 1e-12;
inline constexpr int kNewtonMaxIter = 50;
inline constexpr int kNewtonMaxHalvings = 20;

// Residual certificate for a switched equilibrium, relative form:
//   |lam f-(x0) + (1-lam) f+(x0)| <= kEquilibriumResidual * (1 + |f-| + |f+|).
inline constexpr double kEquilibriumResidual = 1e-9;

// A vector is considered degenerate (zero) when its norm is at or below
// kDegenerate * (1 + context scale).
inline constexpr double kDegenerate = 1e-12;

// Sampled strict-inequality checks ignore points closer than this to the
// decision boundary (the sampled quantity itself is compared).
inline constexpr double kBoundaryGuard = 1e-12;

// Slack for sampled certificate replay: V'(x)(f(x)-f(x0)) <= -alpha|x-x0|^2
// is accepted up to +kCertificateSlack.
inline constexpr double kCertificateSlack = 1e-9;

// Monotone-descent slack along a trajectory, scaled by (1 + V(x(0))).
inline constexpr double kDescentSlack = 1e-8;

// Demidovich sampled check requires lam_max(J + J^T) <= -kDemidovichMargin.
inline constexpr double kDemidovichMargin = 1e-9;

// Region geometry: maximum angle (radians) between the switching-plane
// normal and the sphere-center offsets, and maximum |H| at sampled points of
// a sphere boundary.
inline constexpr double kTangencyAngle = 1e-9;
inline constexpr double kSphereResidual = 1e-9;

// Finite-difference Jacobian step: h_i = kFiniteDiff * (1 + |x_i|).
inline constexpr double kFiniteDiff = 1e-6;

}  // namespace switchsurf::tol
