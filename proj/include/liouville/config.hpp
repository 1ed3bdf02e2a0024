#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace liouville {

/// Value in a config file: a number, a bare/quoted string, or a
/// (possibly nested) array.
class config_value {
  public:
    using array = std::vector<config_value>;

    config_value() : data_(0.0) {}
    explicit config_value(double v) : data_(v) {}
    explicit config_value(std::string v) : data_(std::move(v)) {}
    explicit config_value(array v) : data_(std::move(v)) {}

    bool is_number() const { return std::holds_alternative<double>(data_); }
    bool is_text() const { return std::holds_alternative<std::string>(data_); }
    bool is_array() const { return std::holds_alternative<array>(data_); }

    double number() const;
    const std::string& text() const;
    const array& items() const;

  private:
    std::variant<double, std::string, array> data_;
};

/// Flat key/value config with '#' line comments and nested numeric arrays:
///
///   # coupling matrix
///   A = [[1, 0.5],
///        [0.5, 1]]
///   r_max = 1e4
///   command = solve
///
/// Multiline arrays are supported through bracket balancing.
class config {
  public:
    static config parse_file(const std::string& path);
    static config parse_string(const std::string& text,
                               const std::string& origin = "<string>");

    bool has(const std::string& key) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::string text(const std::string& key) const;
    std::string text_or(const std::string& key,
                        const std::string& fallback) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<double> numbers_or(const std::string& key,
                                   const std::vector<double>& fallback) const;
    Eigen::MatrixXd matrix(const std::string& key) const;
    /// Rows of a 2-level array; rows may have differing lengths.
    std::vector<std::vector<double>> rows(const std::string& key) const;
    const config_value& raw(const std::string& key) const;

    const std::map<std::string, config_value>& entries() const {
        return entries_;
    }

  private:
    std::map<std::string, config_value> entries_;
    std::string origin_;
};

}  // namespace liouville
