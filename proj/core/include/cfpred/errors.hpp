#pragma once

#include <stdexcept>
#include <string>

namespace cfpred {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define CFPRED_DEFINE_ERROR(Name)                                              \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

// numeric core / models
CFPRED_DEFINE_ERROR(ShapeMismatch);
CFPRED_DEFINE_ERROR(InvalidRate);
CFPRED_DEFINE_ERROR(InvalidConfig);
CFPRED_DEFINE_ERROR(StaleTape);
CFPRED_DEFINE_ERROR(PayloadLengthMismatch);

// file I/O
CFPRED_DEFINE_ERROR(IoFailure);
CFPRED_DEFINE_ERROR(FormatVersionMismatch);

// ingest
CFPRED_DEFINE_ERROR(UnknownHandle);
CFPRED_DEFINE_ERROR(TransportError);
CFPRED_DEFINE_ERROR(MalformedResponse);
CFPRED_DEFINE_ERROR(NotAParticipant);

// dataset
CFPRED_DEFINE_ERROR(NonChronologicalInput);
CFPRED_DEFINE_ERROR(EmptyTrainingSet);

// train
CFPRED_DEFINE_ERROR(EmptyDataset);
CFPRED_DEFINE_ERROR(ConfigMismatch);

// eval
CFPRED_DEFINE_ERROR(LengthMismatch);
CFPRED_DEFINE_ERROR(EmptyInput);
CFPRED_DEFINE_ERROR(DegenerateVariance);
CFPRED_DEFINE_ERROR(ZeroBase);

#undef CFPRED_DEFINE_ERROR

} // namespace cfpred
