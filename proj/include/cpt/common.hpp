#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpt {

using Vec = std::vector<double>;

// Limit threshold for the alpha/beta/gamma -> 0 parameter regimes.
inline constexpr double kEpsLimit = 1e-8;
// Exponent arguments are clipped here before calling std::exp.
inline constexpr double kExpClip = 700.0;
// Default hard cap on exponent arguments; beyond it evaluation refuses.
inline constexpr double kExpHardCap = 1e4;

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidParams : public Error {
  public:
    explicit InvalidParams(const std::string& field)
        : Error("invalid CPT parameters: " + field), field_(field) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

class Overflow : public Error {
  public:
    explicit Overflow(double exponent)
        : Error("exponent " + std::to_string(exponent) +
                " exceeds the representable range; clip or rescale the SNR"),
          exponent_(exponent) {}
    double exponent() const { return exponent_; }

  private:
    double exponent_;
};

// Raised for a two-sided derivative query exactly at a kink.
class KinkAt : public Error {
  public:
    explicit KinkAt(double x)
        : Error("derivative is not two-sided at the kink x = " + std::to_string(x)), x_(x) {}
    double x() const { return x_; }

  private:
    double x_;
};

class ProbOutOfRange : public Error {
  public:
    explicit ProbOutOfRange(double p)
        : Error("probability " + std::to_string(p) + " outside [0,1]") {}
};

class NoCaseApplies : public Error {
  public:
    explicit NoCaseApplies(const std::string& what) : Error(what) {}
};

class SlopeOrderViolation : public Error {
  public:
    explicit SlopeOrderViolation(double loss_slope, double gain_slope)
        : Error("no concave junction at the reference point: loss-side slope " +
                std::to_string(loss_slope) + " < gain-side slope " + std::to_string(gain_slope)) {}
};

class InfeasibleStart : public Error {
  public:
    explicit InfeasibleStart(const std::string& what) : Error(what) {}
};

class InnerSolverFailure : public Error {
  public:
    InnerSolverFailure(std::size_t outer_iter, const std::string& what)
        : Error("inner solver failed at outer iteration " + std::to_string(outer_iter) + ": " +
                what),
          outer_iter_(outer_iter) {}
    std::size_t outer_iter() const { return outer_iter_; }

  private:
    std::size_t outer_iter_;
};

class Diverged : public Error {
  public:
    explicit Diverged(const std::string& what) : Error(what) {}
};

class TooManyAgents : public Error {
  public:
    explicit TooManyAgents(std::size_t n, std::size_t cap)
        : Error("grid search limited to " + std::to_string(cap) + " agents, got " +
                std::to_string(n)) {}
};

class DimensionMismatch : public Error {
  public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("allocation vector has " + std::to_string(got) + " entries, expected " +
                std::to_string(expected)) {}
};

class BadSpec : public Error {
  public:
    explicit BadSpec(const std::string& what) : Error("bad scenario spec: " + what) {}
};

class WrongDimension : public Error {
  public:
    explicit WrongDimension(const std::string& what) : Error(what) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace cpt
