#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qantenna {

// 17 significant digits, '.' decimal separator, locale independent.
std::string format_double(double v);
double parse_double(const std::string& s);

// Header-first CSV table. Cells are kept as text so that string columns
// (e.g. the solve path) survive a round trip unchanged.
class CsvTable {
public:
    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> header);

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return cells_.size(); }
    std::size_t column(const std::string& name) const;

    void add_row(std::vector<std::string> cells);
    const std::string& cell(std::size_t row, std::size_t col) const { return cells_.at(row).at(col); }
    double number(std::size_t row, const std::string& name) const;
    std::vector<double> numbers(const std::string& name) const;

    void write(std::ostream& out) const;
    static CsvTable read(std::istream& in);

    bool operator==(const CsvTable&) const = default;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> cells_;
};

// Builds a row from a mix of numbers and text.
class RowBuilder {
public:
    RowBuilder& operator<<(double v);
    RowBuilder& operator<<(int v);
    RowBuilder& operator<<(std::size_t v);
    RowBuilder& operator<<(const std::string& s);
    RowBuilder& operator<<(const char* s) { return *this << std::string(s); }
    std::vector<std::string> take() { return std::move(cells_); }

private:
    std::vector<std::string> cells_;
};

}  // namespace qantenna
