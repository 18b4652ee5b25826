#pragma once

#include <stdexcept>
#include <string>

namespace wavesim {

// Error buckets map onto CLI exit codes: validation=1, solver=2, io=3.
enum class error_kind { validation, solver, io };

class sim_error : public std::runtime_error {
public:
    sim_error(error_kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    error_kind kind() const { return kind_; }

private:
    error_kind kind_;
};

class validation_error : public sim_error {
public:
    explicit validation_error(const std::string& what)
        : sim_error(error_kind::validation, what) {}
};

class solver_error : public sim_error {
public:
    explicit solver_error(const std::string& what)
        : sim_error(error_kind::solver, what) {}
};

class io_error : public sim_error {
public:
    explicit io_error(const std::string& what)
        : sim_error(error_kind::io, what) {}
};

// Parse failures carry the 1-based source position.
class parse_error : public validation_error {
public:
    parse_error(int line, int column, const std::string& what)
        : validation_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

} // namespace wavesim
