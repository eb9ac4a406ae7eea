// Exception types shared by every nmzkit module.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nmzkit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimMismatch : Error {
  using Error::Error;
};

// Raised when an operator maps a basis element outside the span of the basis.
struct BasisNotClosed : Error {
  BasisNotClosed(std::size_t element, std::string detail)
      : Error("basis not closed at element " + std::to_string(element) + ": " + detail),
        element(element),
        detail(std::move(detail)) {}
  std::size_t element;
  std::string detail;
};

struct RankDeficient : Error {
  using Error::Error;
};
struct LinearlyDependent : Error {
  using Error::Error;
};
struct UnsupportedOrder : Error {
  using Error::Error;
};
struct EmptySpace : Error {
  using Error::Error;
};
struct NotNormalized : Error {
  using Error::Error;
};
struct InvalidDensityMatrix : Error {
  using Error::Error;
};
struct NotHermitian : Error {
  using Error::Error;
};
struct BasisMismatch : Error {
  using Error::Error;
};
struct StepDivergence : Error {
  using Error::Error;
};
struct PairingSingular : Error {
  using Error::Error;
};
struct ConfigParse : Error {
  using Error::Error;
};
struct IoFailure : Error {
  using Error::Error;
};

}  // namespace nmzkit
