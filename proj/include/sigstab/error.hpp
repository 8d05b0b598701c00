#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigstab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model file is missing, unparsable, or violates a shape/finiteness rule.
class MalformedModel : public Error {
 public:
  using Error::Error;
};

class BadNode : public Error {
 public:
  BadNode(std::size_t node, std::size_t n)
      : Error("node index " + std::to_string(node) + " out of range for graph with " +
              std::to_string(n) + " nodes"),
        node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class BadParameter : public Error {
 public:
  using Error::Error;
};

class BadMatrix : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration refused because the graph exceeds the configured size guard.
class TooLarge : public Error {
 public:
  using Error::Error;
};

class DivergedTraining : public Error {
 public:
  explicit DivergedTraining(std::size_t iteration)
      : Error("training diverged (non-finite loss) at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace sigstab
