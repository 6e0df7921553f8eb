#pragma once

#include <stdexcept>
#include <string>

namespace scene4d {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct NotARotation : Error { using Error::Error; };
struct BehindCamera : Error { using Error::Error; };
struct NonPositiveDepth : Error { using Error::Error; };

// cue ingestion
struct DimensionMismatch : Error { using Error::Error; };
struct MissingFile : Error { using Error::Error; };
struct CorruptHeader : Error { using Error::Error; };
struct InconsistentDimensions : Error { using Error::Error; };

// pipeline / optimization
struct InsufficientStaticTracks : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct EmptyScene : Error { using Error::Error; };

// evaluation
struct DegenerateConfiguration : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct InsufficientOverlap : Error { using Error::Error; };

}  // namespace scene4d
