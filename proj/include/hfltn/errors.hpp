#pragma once

#include <stdexcept>
#include <string>

namespace hfltn {

// Base class for every error this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ring / sharing
struct MagnitudeExceeded : Error { using Error::Error; };
struct InvalidShareCount : Error { using Error::Error; };
struct IncompleteShareSet : Error { using Error::Error; };
struct DimMismatch : Error { using Error::Error; };

// p2p
struct ShareCountMismatch : Error { using Error::Error; };

// scheduler
struct EmptyRoster : Error { using Error::Error; };

// aggregation
struct DuplicateContributor : Error { using Error::Error; };
struct EmptyRound : Error { using Error::Error; };
struct NonFiniteInput : Error { using Error::Error; };
struct UntrainedModel : Error { using Error::Error; };

// trainer
struct EmptyDataset : Error { using Error::Error; };
struct DivergedLoss : Error { using Error::Error; };
struct LayoutMismatch : Error { using Error::Error; };

// datagen
struct TooFewRecords : Error { using Error::Error; };

// wire format
struct WireError : Error { using Error::Error; };
struct BadMagic : WireError { using WireError::WireError; };
struct BadVersion : WireError { using WireError::WireError; };
struct CrcMismatch : WireError { using WireError::WireError; };
struct Truncated : WireError { using WireError::WireError; };
struct UnexpectedMsgType : WireError { using WireError::WireError; };

// config
struct ConfigInvalid : Error { using Error::Error; };

}  // namespace hfltn
