#pragma once

#include <stdexcept>
#include <string>

namespace aiart {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AIART_DECLARE_ERROR(Name) \
  class Name : public Error {     \
   public:                        \
    using Error::Error;           \
  }

AIART_DECLARE_ERROR(InvalidInput);
AIART_DECLARE_ERROR(ShapeError);
AIART_DECLARE_ERROR(DecodeError);
AIART_DECLARE_ERROR(IOError);
AIART_DECLARE_ERROR(EmptyDataset);
AIART_DECLARE_ERROR(StratificationError);
AIART_DECLARE_ERROR(DegenerateLabels);
AIART_DECLARE_ERROR(LabelError);
AIART_DECLARE_ERROR(UnsupportedModelFile);
AIART_DECLARE_ERROR(TrainingError);

#undef AIART_DECLARE_ERROR

}  // namespace aiart
