#pragma once

#include <stdexcept>
#include <string>

namespace schlesinger {

// Base class for every error raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// System assembly and spectral decomposition.
struct DuplicatePoles : Error { using Error::Error; };
struct NonSquareResidue : Error { using Error::Error; };
struct NotDiagonalizable : Error { using Error::Error; };
struct EvaluationAtPole : Error { using Error::Error; };
struct FuchsViolation : Error { using Error::Error; };
struct RankMismatch : Error { using Error::Error; };
struct InfinityMismatch : Error { using Error::Error; };
struct InvalidPartition : Error { using Error::Error; };
struct SinglePole : Error { using Error::Error; };

// Elementary divisor matrices.
struct EvalAtPole : Error { using Error::Error; };
struct EvalAtZero : Error { using Error::Error; };
struct DegeneratePairing : Error { using Error::Error; };

// Elementary transformations and the generating function.
struct InvalidIndex : Error { using Error::Error; };
struct MultipleEigenvalue : Error { using Error::Error; };
struct LogOfZeroPairing : Error { using Error::Error; };
struct GradientMismatch : Error { using Error::Error; };
struct OrbitStepFailure : Error { using Error::Error; };

// Two-by-two, three-pole reduction.
struct SingularParameterization : Error { using Error::Error; };
struct FrameMismatch : Error { using Error::Error; };
struct Indeterminacy : Error { using Error::Error; };
struct ZeroP : Error { using Error::Error; };
struct BadT : Error { using Error::Error; };

// Three-by-three, two-pole reduction.
struct AlphaBetaUnsolvable : Error { using Error::Error; };
struct InfinitySpectrumMismatch : Error { using Error::Error; };
struct MultipleRoots : Error { using Error::Error; };
struct DegenerateFrame : Error { using Error::Error; };
struct InconsistentEntries : Error { using Error::Error; };
struct DegenerateCross : Error { using Error::Error; };

// Picard lattice bookkeeping.
struct LatticeStructure : Error { using Error::Error; };
struct BasisMismatch : Error { using Error::Error; };
struct NotIsometry : Error { using Error::Error; };
struct NotTranslation : Error { using Error::Error; };
struct DeltaNotFixed : Error { using Error::Error; };
struct IntegerOverflow : Error { using Error::Error; };

// Configuration and serialization.
struct ParseError : Error { using Error::Error; };

}  // namespace schlesinger
