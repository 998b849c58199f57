#pragma once

#include <stdexcept>
#include <string>

namespace darkscan {

// Root of every error the library throws. Callers that only need a
// diagnostic can catch this; tests and adapters catch the concrete kinds.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define DARKSCAN_DEFINE_ERROR(Name)          \
    class Name : public Error {              \
    public:                                  \
        using Error::Error;                  \
    };

// taxonomy
DARKSCAN_DEFINE_ERROR(UnknownLabel)

// ingest
DARKSCAN_DEFINE_ERROR(NetworkError)
DARKSCAN_DEFINE_ERROR(RobotsDisallowed)
DARKSCAN_DEFINE_ERROR(NotHtml)
DARKSCAN_DEFINE_ERROR(TooLarge)
DARKSCAN_DEFINE_ERROR(ParseFailure)
DARKSCAN_DEFINE_ERROR(InvalidArgument)

// classifier
DARKSCAN_DEFINE_ERROR(NonFinite)
DARKSCAN_DEFINE_ERROR(InvalidDistribution)
DARKSCAN_DEFINE_ERROR(VocabMissingMarkers)
DARKSCAN_DEFINE_ERROR(ArtifactLoadError)
DARKSCAN_DEFINE_ERROR(ShapeMismatch)
DARKSCAN_DEFINE_ERROR(UnsupportedOperator)
DARKSCAN_DEFINE_ERROR(EndpointUnavailable)
DARKSCAN_DEFINE_ERROR(MalformedResponse)

// detection
DARKSCAN_DEFINE_ERROR(EmptySite)
DARKSCAN_DEFINE_ERROR(ModeMismatch)

// evaluation
DARKSCAN_DEFINE_ERROR(FileUnreadable)
DARKSCAN_DEFINE_ERROR(MissingHeader)
DARKSCAN_DEFINE_ERROR(ClassTooSmall)
DARKSCAN_DEFINE_ERROR(LengthMismatch)
DARKSCAN_DEFINE_ERROR(EmptyInput)
DARKSCAN_DEFINE_ERROR(DegenerateData)

// report / service
DARKSCAN_DEFINE_ERROR(SchemaViolation)
DARKSCAN_DEFINE_ERROR(BindFailure)

#undef DARKSCAN_DEFINE_ERROR

}  // namespace darkscan
