/** @file errors.hpp
 *  @brief Exception types thrown by the planner and simulator.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace pincer {

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Arguments outside the domain of a formula (arccos argument, log of <= 1).
class DomainError : public Error
{
  public:
    using Error::Error;
};

/// Sweeper speed too low for the requested operation.
class InfeasibleSpeed : public Error
{
  public:
    InfeasibleSpeed(std::string const& what, double v_critical = 0.0)
        : Error(what), v_critical_(v_critical)
    {
    }
    double v_critical() const { return v_critical_; }

  private:
    double v_critical_;
};

class InfeasibleScenario : public Error
{
  public:
    using Error::Error;
};

class NoConvergence : public Error
{
  public:
    using Error::Error;
};

class OddTeamSize : public Error
{
  public:
    using Error::Error;
};

/// Closed form and recursion disagree beyond tolerance.
class ConsistencyError : public Error
{
  public:
    using Error::Error;
};

class GridTooSmall : public Error
{
  public:
    using Error::Error;
};

class PhaseDesync : public Error
{
  public:
    using Error::Error;
};

class ParseError : public Error
{
  public:
    ParseError(std::string const& what, int line, std::string field)
        : Error(what), line_(line), field_(std::move(field))
    {
    }
    int line() const { return line_; }
    std::string const& field() const { return field_; }

  private:
    int line_;
    std::string field_;
};

class ValidationError : public Error
{
  public:
    using Error::Error;
};

}  // namespace pincer
