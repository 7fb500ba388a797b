#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hetgnn {

using Real = double;
using VertexId = std::uint32_t;
using EdgeIndex = std::uint64_t;

inline constexpr std::size_t kRealSize = sizeof(Real);

// Malformed input files or generator parameters.
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public GraphError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : GraphError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Misuse of a protocol (e.g. staging into the wrong super-batch). Not recoverable.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A reused embedding older than the 2n-1 version window. Must never fire.
class StalenessViolation : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

// Simulated device memory exceeded. Names the first task whose allocation
// did not fit.
class SimulatedOom : public std::runtime_error {
 public:
  SimulatedOom(std::string task, std::string role, std::string stage, std::uint64_t requested,
               std::uint64_t capacity)
      : std::runtime_error("simulated OOM on " + role + " at task '" + task + "' (stage " + stage +
                           "): needs " + std::to_string(requested) + " bytes, capacity " +
                           std::to_string(capacity)),
        task_(std::move(task)),
        role_(std::move(role)),
        stage_(std::move(stage)),
        requested_(requested),
        capacity_(capacity) {}
  const std::string& task() const { return task_; }
  const std::string& role() const { return role_; }
  const std::string& stage() const { return stage_; }
  std::uint64_t requested() const { return requested_; }
  std::uint64_t capacity() const { return capacity_; }

 private:
  std::string task_;
  std::string role_;
  std::string stage_;
  std::uint64_t requested_;
  std::uint64_t capacity_;
};

}  // namespace hetgnn
