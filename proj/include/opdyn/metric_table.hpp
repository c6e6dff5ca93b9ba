#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace opdyn {

using Cell = std::variant<std::string, double, std::int64_t>;

/// A named table of rows with a fixed column schema. One column may be
/// designated as the support count; rows whose support falls below the
/// floor are flagged (never dropped).
class MetricTable {
public:
    MetricTable() = default;
    MetricTable(std::string name, std::vector<std::string> columns, std::string support_column = {},
                std::int64_t support_floor = 20);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t num_rows() const { return rows_.size(); }
    const std::vector<Cell>& row(std::size_t r) const { return rows_[r]; }
    std::int64_t support_floor() const { return support_floor_; }
    const std::string& support_column() const { return support_column_; }

    void add_row(std::vector<Cell> row);

    std::size_t column_index(const std::string& column) const;

    double number(std::size_t r, const std::string& column) const;
    std::int64_t count(std::size_t r, const std::string& column) const;
    std::string text(std::size_t r, const std::string& column) const;

    bool low_support(std::size_t r) const;

    /// Rows whose text columns equal the given values, in order.
    std::vector<std::size_t> find(const std::vector<std::pair<std::string, std::string>>& keys) const;

    /// CSV with a header row; a trailing low_support column when a support
    /// column is set and support_flag is true. Doubles use the shortest
    /// round-trip form; +inf is "inf".
    std::string to_csv(bool support_flag = true) const;

private:
    std::string name_;
    std::vector<std::string> columns_;
    std::string support_column_;
    std::int64_t support_floor_ = 20;
    std::vector<std::vector<Cell>> rows_;
};

std::string format_double(double v);

} // namespace opdyn
