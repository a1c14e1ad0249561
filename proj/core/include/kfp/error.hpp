#pragma once

#include <stdexcept>
#include <string>

namespace kfp {

/// Base class of every error raised by the library. `kind()` is the stable
/// identifier written into the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define KFP_DEFINE_ERROR(Name)                                           \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(#Name, what) {}       \
  }

KFP_DEFINE_ERROR(DomainError);
KFP_DEFINE_ERROR(RegimeError);
KFP_DEFINE_ERROR(QuadratureFailure);
KFP_DEFINE_ERROR(ConvergenceFailure);
KFP_DEFINE_ERROR(SingularityError);
KFP_DEFINE_ERROR(RangeExceeded);
KFP_DEFINE_ERROR(ExtrapolationUnstable);
KFP_DEFINE_ERROR(DegenerateTail);
KFP_DEFINE_ERROR(SparseBins);
KFP_DEFINE_ERROR(ConfigError);

#undef KFP_DEFINE_ERROR

}  // namespace kfp
