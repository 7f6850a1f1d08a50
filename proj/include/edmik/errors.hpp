#pragma once

#include <stdexcept>
#include <string>

namespace edmik {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EDMIK_DECLARE_ERROR(Name) \
  class Name : public Error {     \
   public:                        \
    using Error::Error;           \
  }

EDMIK_DECLARE_ERROR(InvalidArgument);
EDMIK_DECLARE_ERROR(EmbeddingDimensionExceeded);
EDMIK_DECLARE_ERROR(DegenerateAnchors);
EDMIK_DECLARE_ERROR(RankDeficientBase);
EDMIK_DECLARE_ERROR(LeftManifold);
EDMIK_DECLARE_ERROR(DimensionMismatch);
EDMIK_DECLARE_ERROR(InconsistentPoints);
EDMIK_DECLARE_ERROR(ParseError);
EDMIK_DECLARE_ERROR(IoError);

#undef EDMIK_DECLARE_ERROR

}  // namespace edmik
