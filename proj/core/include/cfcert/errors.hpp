#pragma once

#include <stdexcept>
#include <string>

namespace cfcert {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
  public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A structural invariant of an input object is violated.
class ConstraintError : public std::invalid_argument {
  public:
    explicit ConstraintError(const std::string& what) : std::invalid_argument(what) {}
};

// No admissible alpha exists for the given model.
class InfeasibleError : public std::runtime_error {
  public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// alpha falls outside the model's applicability window.
class AlphaOutOfRange : public std::domain_error {
  public:
    explicit AlphaOutOfRange(const std::string& what) : std::domain_error(what) {}
};

// A transform was evaluated outside its validity domain or image.
class TransformDomainError : public std::domain_error {
  public:
    explicit TransformDomainError(const std::string& what) : std::domain_error(what) {}
};

// A transform failed its strict-monotonicity construction check.
class MonotonicityError : public std::runtime_error {
  public:
    explicit MonotonicityError(const std::string& what) : std::runtime_error(what) {}
};

// Operation asked of the wrong transform kind.
class KindError : public std::logic_error {
  public:
    explicit KindError(const std::string& what) : std::logic_error(what) {}
};

// A numerical routine failed to converge or a factorization broke down.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cfcert
