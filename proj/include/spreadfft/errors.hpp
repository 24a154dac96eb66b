#pragma once

#include <stdexcept>
#include <string>

namespace spreadfft {

// Shared error taxonomy. Everything derives from Error so the CLI boundary
// can map any numerical failure to one exit code while keeping the
// fine-grained types available to tests.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument within pole tolerance of a gamma pole (non-positive integer).
struct PoleError : Error { using Error::Error; };

// Result magnitude not representable in double.
struct RangeError : Error { using Error::Error; };

// Argument outside a function's mathematical domain.
struct DomainError : Error { using Error::Error; };

// Contour displacement violates an integrability / analyticity strip.
struct ContourError : Error { using Error::Error; };

// Complex-log branch could not be tracked continuously along a lattice row.
struct BranchError : Error { using Error::Error; };

// Imaginary residue of a nominally real output exceeds tolerance.
struct ResidueError : Error { using Error::Error; };

// Greek requested for a model that has no analytic multiplier.
struct UnsupportedGreek : Error { using Error::Error; };

// Strike outside the span of usable interpolation nodes.
struct ExtrapolationError : Error { using Error::Error; };

// Requested grid would exceed the allocation budget.
struct MemoryBudgetError : Error { using Error::Error; };

// Adaptive quadrature failed to reach the requested accuracy.
struct QuadratureError : Error { using Error::Error; };

}  // namespace spreadfft
