#pragma once

#include <stdexcept>
#include <string>

namespace pllsim {

// Invalid physical or controller configuration (bad gains, loop gain >= 1, ...).
class model_error : public std::runtime_error {
public:
    explicit model_error(const std::string& what) : std::runtime_error(what) {}
};

// Scenario-file syntax or consistency problem; message carries the line number.
class parse_error : public std::runtime_error {
public:
    parse_error(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

// The integrator produced a non-finite state; carries the last valid sample.
class integration_diverged : public std::runtime_error {
public:
    integration_diverged(double t, double delta, double xi)
        : std::runtime_error("integration diverged at t=" + std::to_string(t)),
          t_(t), delta_(delta), xi_(xi) {}

    [[nodiscard]] double t() const { return t_; }
    [[nodiscard]] double delta() const { return delta_; }
    [[nodiscard]] double xi() const { return xi_; }

private:
    double t_;
    double delta_;
    double xi_;
};

}  // namespace pllsim
