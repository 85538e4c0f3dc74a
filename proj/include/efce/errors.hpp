#pragma once

#include <stdexcept>
#include <string>

namespace efce {

// Malformed input file (JSON game, plan CSV, LP file).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Game structure violates a model invariant; message carries the report.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sequence id or (infoset, action) pair outside the game.
struct UnknownSequence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Generator parameters admit no legal game (e.g. fleet cannot be placed).
struct Unsatisfiable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Enumeration or construction exceeds the configured size cap.
struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cholesky pivot collapsed; the constraint system is rank-deficient.
struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A plan failed the feasibility tolerance where a feasible one is required.
struct InfeasiblePlan : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace efce
