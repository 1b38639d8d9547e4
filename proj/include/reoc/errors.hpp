#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace reoc {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DomainMismatch : public Error {
public:
  using Error::Error;
};

class UnknownPort : public Error {
public:
  using Error::Error;
};

class PortMismatch : public Error {
public:
  using Error::Error;
};

class InvalidSize : public Error {
public:
  using Error::Error;
};

class SyntaxError : public Error {
public:
  SyntaxError(int line, int column, const std::string& what)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": syntax error: " + what),
        line_(line), column_(column) {}
  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int column() const { return column_; }

private:
  int line_;
  int column_;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

/// One entry of the fold log kept by the compiler.
struct FoldStep {
  std::string unit;
  int step = 0;
  std::string operand;
  std::size_t product_states = 0;
  std::size_t product_transitions = 0;
  std::size_t states = 0;        // after hide/prune/reduce
  std::size_t transitions = 0;
};

/// Raised when an automaton outgrows the transition budget.
class BudgetExceeded : public Error {
public:
  BudgetExceeded(std::string unit, int step, std::size_t size, std::size_t budget,
                 std::vector<FoldStep> log = {})
      : Error("budget exceeded in unit " + unit + " at fold step " + std::to_string(step) +
              ": " + std::to_string(size) + " transitions > budget " + std::to_string(budget)),
        unit_(std::move(unit)), step_(step), size_(size), budget_(budget), log_(std::move(log)) {}

  [[nodiscard]] const std::string& unit() const { return unit_; }
  [[nodiscard]] int step() const { return step_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::size_t budget() const { return budget_; }
  [[nodiscard]] const std::vector<FoldStep>& log() const { return log_; }

private:
  std::string unit_;
  int step_;
  std::size_t size_;
  std::size_t budget_;
  std::vector<FoldStep> log_;
};

}  // namespace reoc
