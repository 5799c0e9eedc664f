#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace glasdi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected configuration or parameter value.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Newton iteration failed to reach its tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<double> history,
                 std::size_t step_index = 0)
      : Error(what), history_(std::move(history)), step_index_(step_index) {}

  const std::vector<double>& residual_history() const { return history_; }
  std::size_t step_index() const { return step_index_; }

 private:
  std::vector<double> history_;
  std::size_t step_index_;
};

/// A non-finite value appeared (latent integration, training loss).
class Divergence : public Error {
 public:
  Divergence(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class ExhaustedSpace : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace glasdi
