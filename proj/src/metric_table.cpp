#include "opdyn/metric_table.hpp"

#include "opdyn/error.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace opdyn {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

MetricTable::MetricTable(std::string name, std::vector<std::string> columns, std::string support_column,
                         std::int64_t support_floor)
    : name_(std::move(name)),
      columns_(std::move(columns)),
      support_column_(std::move(support_column)),
      support_floor_(support_floor) {
    if (!support_column_.empty()) (void)column_index(support_column_);
}

void MetricTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw ModelError(name_ + ": row width does not match schema");
    rows_.push_back(std::move(row));
}

std::size_t MetricTable::column_index(const std::string& column) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c] == column) return c;
    }
    throw ModelError(name_ + ": no column named " + column);
}

double MetricTable::number(std::size_t r, const std::string& column) const {
    const Cell& cell = rows_.at(r)[column_index(column)];
    if (const auto* d = std::get_if<double>(&cell)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i);
    throw ModelError(name_ + ": column " + column + " is not numeric");
}

std::int64_t MetricTable::count(std::size_t r, const std::string& column) const {
    const Cell& cell = rows_.at(r)[column_index(column)];
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
    throw ModelError(name_ + ": column " + column + " is not a count");
}

std::string MetricTable::text(std::size_t r, const std::string& column) const {
    const Cell& cell = rows_.at(r)[column_index(column)];
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    throw ModelError(name_ + ": column " + column + " is not text");
}

bool MetricTable::low_support(std::size_t r) const {
    if (support_column_.empty()) return false;
    return count(r, support_column_) < support_floor_;
}

std::vector<std::size_t> MetricTable::find(const std::vector<std::pair<std::string, std::string>>& keys) const {
    std::vector<std::size_t> idx;
    for (const auto& [col, _] : keys) idx.push_back(column_index(col));
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        bool match = true;
        for (std::size_t k = 0; k < keys.size() && match; ++k) {
            const auto* s = std::get_if<std::string>(&rows_[r][idx[k]]);
            match = s && *s == keys[k].second;
        }
        if (match) out.push_back(r);
    }
    return out;
}

std::string MetricTable::to_csv(bool support_flag) const {
    const bool flag = support_flag && !support_column_.empty();
    std::ostringstream os;
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    if (flag) os << ",low_support";
    os << '\n';
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            if (c) os << ',';
            std::visit([&os](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>) os << format_double(v);
                else os << v;
            }, rows_[r][c]);
        }
        if (flag) os << ',' << (low_support(r) ? 1 : 0);
        os << '\n';
    }
    return os.str();
}

} // namespace opdyn
